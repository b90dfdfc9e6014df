// SPDX-License-Identifier: Apache-2.0
// Regenerates committed test fixtures: glyphembed_fixtures <out-dir>
#include <filesystem>
#include <iostream>

#include "glyphembed/corpus.hpp"
#include "glyphembed/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: glyphembed_fixtures <out-dir>\n";
    return 2;
  }
  namespace ge = glyphembed;
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  const auto overfit = ge::synthetic::overfit_fixture();
  ge::write_corpus_tsv((dir / "overfit64.tsv").string(), overfit.instances, overfit.categories);
  return 0;
}
