#pragma once
// Command-line entry point.  Subcommands:
//   analyze  weighted Dirichlet energy or vanishing-box profile of a map
//   verify   named verification suite (or all of them) with a JSON report
//   extend   reflection extension diagnostics: identity residual, exterior
//            integral conditions, pointwise dilatation ratios
//   beta     dyadic beta/delta statistics of a map boundary, or the quadtree
//            flatness sum of a polyline read from CSV
//   tst      traveling-salesman comparison lhs/rhs on one dyadic root
//   sweep    energy or profile endpoint across a grid of exponents
//
// Exit codes: 0 every check passed, 1 at least one check failed or errored,
// 2 usage error (message names the offending flag), 3 runtime failure.

namespace curvespace {

int cli_main(int argc, char** argv);

}  // namespace curvespace
