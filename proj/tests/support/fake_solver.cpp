// Stand-in for an external solver process. Reads the triplet file, solves it
// with the embedded method and writes the solution file.
//
//   fake_solver [--fail|--garbage|--short] problem.txt index.json solution.txt
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "equiflow/problem.hpp"
#include "equiflow/solver.hpp"

int main(int argc, char** argv)
{
  std::string mode;
  int first = 1;
  if (argc == 5) {
    mode = argv[1];
    first = 2;
  }
  if (argc - first != 3) {
    std::cerr << "usage: fake_solver [mode] problem index solution\n";
    return 2;
  }
  if (mode == "--fail") return 7;

  std::ifstream in(argv[first]);
  std::ostringstream text;
  text << in.rdbuf();
  std::ofstream out(argv[first + 2]);
  if (mode == "--garbage") {
    out << "status maybe\n1 2 3\n";
    return 0;
  }
  const equiflow::StandardProblem p = equiflow::parse_triplets(text.str());
  const equiflow::SolveResult r = equiflow::solve(p, equiflow::SolveSettings{});
  Eigen::VectorXd x = r.x;
  if (mode == "--short") x.conservativeResize(x.size() / 2);
  out << equiflow::solution_to_text(r.status, x);
  return 0;
}
