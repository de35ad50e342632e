#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vad/detector.hpp"

namespace vad {

using ReportHeader = std::vector<std::pair<std::string, std::string>>;

/// Line-oriented detection report:
///
///   # vad-detection-report 1
///   # <key> <value>                      provenance, one per line
///   geometry <width> <height> <frames> <cube_w> <cube_h> <cube_t> <rows> <cols> <slabs>
///   fusion <mode> <alpha>
///   slab <k>
///   cube <row> <col> <g_score> <g_ratio> <l_score> <l_ratio> <fused_ratio> <labels>
///   frame <index> <max_fused_ratio> <anomalous_cubes> <cube_labels>
///
/// `labels` is three characters (global, local, fused), each N or A.
/// `cube_labels` lists fused labels of the frame's slab as 0/1 in row-major
/// order, or `-` for cropped tail frames. Reals use shortest round-trip form.
void write_detection_report(std::ostream& out, const DetectionResult& r,
                            const ReportHeader& header = {});

/// Rebuilds scores, labels, frame scores, and masks from a report.
DetectionResult read_detection_report(std::istream& in);

std::string format_real(double v);

}  // namespace vad
