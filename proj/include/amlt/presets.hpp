#pragma once

#include <optional>
#include <string>
#include <vector>

namespace amlt {

// Built-in task library: "matmul", "q1", "q2", "q3", plus optional suffixes
// picking the threshold form (-tc constant 100, -ti thres[i], -tj thres[j],
// -tij thres[i][j]; queries only, defaults q1/q2 -tj and q3 -tc) and the
// operand orientation (-ab, -atb, -abt, -atbt; default -ab, "t" marking a
// transposed read in the statement). Examples: "q1", "q2-tij", "q3-ti-atbt",
// "matmul-abt". Returns the task source, or nullopt for unknown names.
std::optional<std::string> preset_source(const std::string& name);

// The 52 fully qualified preset names: matmul x 4 orientations plus
// q1/q2/q3 x 4 threshold forms x 4 orientations.
std::vector<std::string> all_preset_names();

}  // namespace amlt
