#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace charex::cli {

// Batch front-end.  Subcommands: schur, hciz, partition, rate, minimize,
// gibbs, yangmills, verify.  Global flags: --seed, --samples, --out <dir>,
// --format csv|json, --config <file> (flat key=value; flags override).
//
// Exit codes: 0 success; 1 computational failure (bound violations,
// non-convergence, hypothesis/radius/tail rejections); 2 usage or config
// errors (bad flags, malformed inputs).  Every error prints one JSON object
//   {"error": {"code": "...", "message": "..."}}
// on stderr.  Outputs are byte-identical across runs with identical flags
// and seed; every emitted file embeds version, seed, command, and the full
// parameter set.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace charex::cli
