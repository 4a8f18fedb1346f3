// Writes the layer-size ledger of every architecture as JSON to stdout.
#include <iostream>

#include "spoofbench/models/model.hpp"

int main() {
  std::cout << spoofbench::models::layer_ledger_all().dump(1) << '\n';
  return 0;
}
