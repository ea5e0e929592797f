// Replays the square4 counterexample round by round and prints the grid
// after each synchronous step.

#include <iostream>

#include "bperc/io.hpp"
#include "bperc/scenarios.hpp"

int main(int argc, char** argv) {
  using namespace bperc;
  const std::string path = argc > 1 ? argv[1] : std::string(BPERC_CORPUS_DIR) + "/square4_figure2.json";
  const Scenario sc = load_scenario(path);
  const Neighbourhood nbhd = build_neighbourhood(sc.neighbourhood);
  Configuration cfg = make_configuration(sc.domain, sc.infected);
  std::cout << "round 0: " << cfg.infected_count() << " sites\n" << to_grid(cfg);
  for (int round = 1;; ++round) {
    Configuration next = synchronous_step(cfg, nbhd);
    if (next.infected_count() == cfg.infected_count()) break;
    cfg = std::move(next);
    std::cout << "\nround " << round << ": " << cfg.infected_count() << " sites\n" << to_grid(cfg);
  }
  std::cout << (cfg.is_full() ? "\nfully infected\n" : "\nstopped before full infection\n");
}
