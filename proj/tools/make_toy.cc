// Copyright 2026 The EventX Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Writes the synthetic toy corpus used by the examples and tests.

#include <iostream>

#include "CLI11.hpp"

#include "eventx/toy.h"

int main(int argc, char **argv) {
  CLI::App app{"eventx-make-toy: write a synthetic event corpus"};
  std::string dir = "data/toy";
  evx::ToyOptions opts;
  app.add_option("-o,--output-dir", dir, "Destination directory");
  app.add_option("--docs", opts.num_docs, "Number of documents")->check(CLI::PositiveNumber);
  app.add_option("--types", opts.num_types, "Event types used (1-4)")->check(CLI::Range(1, 4));
  app.add_option("--dim", opts.vector_dim, "Word vector dimension")->check(CLI::PositiveNumber);
  app.add_option("--seed", opts.seed, "Random seed");
  CLI11_PARSE(app, argc, argv);
  try {
    evx::WriteToyData(evx::MakeToyData(opts), dir);
  } catch (const std::exception &e) {
    std::cerr << "eventx-make-toy: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "wrote " << opts.num_docs << " documents to " << dir << "\n";
  return 0;
}
