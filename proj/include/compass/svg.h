#ifndef COMPASS_SVG_H_
#define COMPASS_SVG_H_

#include <string>
#include <vector>

#include "compass/attitude.h"
#include "compass/descriptor.h"
#include "compass/features.h"
#include "compass/raycast.h"
#include "compass/reports.h"

namespace compass {

// Plots are emitted as standalone SVG documents. `comment` (typically a
// make_header block) is embedded verbatim in an XML comment.

// Five stacked channel strips (gray scale, one column per bin) and a polar
// range plot with window hits in red.
std::string descriptor_svg(const RadialDescriptor& d, const RaycastConfig& cfg, const std::string& comment);

// Segments in green, segments bordering a detection in red, boxes in blue.
std::string detection_overlay_svg(int width, int height, const std::vector<LineSegment>& segments,
                                  const std::vector<int>& window_segments,
                                  const std::vector<WindowDetection>& detections, const std::string& comment);

// Camera, map and agreement strips over azimuth.
std::string agreement_svg(const AgreementReport& report, const std::string& comment);

// Score over shift with the peak marked.
std::string correlation_svg(const std::vector<double>& curve, double yaw_anchor, const std::string& comment);

// Orthographic view of the unit sphere along the optical axis: inlier great
// circles colored per vanishing point, remaining circles gray.
std::string sphere_svg(const CameraAttitude& attitude, const std::string& comment);

}  // namespace compass

#endif  // COMPASS_SVG_H_
