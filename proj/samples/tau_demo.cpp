// A few runs of the arrival process for the square model, printed as CSV.

#include <iostream>

#include "bperc/io.hpp"
#include "bperc/process.hpp"

int main() {
  using namespace bperc;
  const Neighbourhood nbhd = build_neighbourhood(NeighbourhoodSpec::named(NamedModel::square));
  std::cout << kRecordCsvHeader << "\n";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ProcessRecord rec = run_once(nbhd, 128, seed);
    rec.wall_ms = 0;
    std::cout << to_csv_row(rec) << "\n";
  }
}
