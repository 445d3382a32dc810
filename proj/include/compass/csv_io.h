#ifndef COMPASS_CSV_IO_H_
#define COMPASS_CSV_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "compass/features.h"

namespace compass {

// Segment CSV: header "x1,y1,x2,y2", one segment per row, pixels.
// Detection CSV: header "camera_id,b_x,b_y,b_w,b_h,score[,contrast_score,texture_score]".
// Lines starting with '#' and blank lines are ignored on read.

void write_segments_csv(std::ostream& out, const std::vector<LineSegment>& segments, const std::string& header);
std::vector<LineSegment> read_segments_csv(const std::string& path);

void write_detections_csv(std::ostream& out, const std::vector<WindowDetection>& detections,
                          const std::string& header);
std::vector<WindowDetection> read_detections_csv(const std::string& path);

}  // namespace compass

#endif  // COMPASS_CSV_IO_H_
