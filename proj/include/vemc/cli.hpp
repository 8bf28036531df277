#pragma once

#include <string>
#include <vector>

namespace vemc {

/// Column schema of the trig convergence CSV.
inline constexpr const char* kTrigCsvHeader =
    "h,ndof_u,ndof_p,delta_u,delta_p,iters,log_factor";

/// Run the command-line tool. Exit status: 0 success, 1 invalid input,
/// 2 solver non-convergence. Messages go to stderr.
int cli_main(const std::vector<std::string>& args);

}  // namespace vemc
