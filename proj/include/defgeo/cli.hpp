#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace defgeo {

// Entry point for the command-line tool.  Exit codes: 0 success (and "yes"
// answers), 1 verified "no" verdicts (non-membership, inequivalence, failed
// equational-domain checks, oracle disagreement), 2 errors (usage, parse,
// resource guards).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace defgeo
