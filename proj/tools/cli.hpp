#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bargrain::cli {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the `bargrain` command line. `args` excludes the program name.
///
///   synth    --out DIR [--subjects N --rois N --steps T --seed S]
///   train    --data DIR --config FILE --out CKPT [--seed S --mode M --log CSV --metrics JSON]
///   eval     --model CKPT --data DIR [--out JSON]
///   ablate   --data DIR --config FILE --out CSV [--seed S]
///   inspect  --model CKPT --data DIR --subject ID [--top-percent P --out DIR]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bargrain::cli
