// Minimal library usage: generate labeled matrices, fit, cluster and score.

#include <iostream>

#include "tsnmf/tsnmf.hpp"

int main() {
  tsnmf::SynthOptions synth;
  synth.k = 3;
  synth.n_per = 40;
  synth.noise_sigma = 0.2;
  synth.seed = 7;
  const tsnmf::Dataset2D data = tsnmf::synth_clusters(synth);

  tsnmf::SolverConfig config;
  config.k = 3;
  config.r = 3;
  config.lambda1 = 0.1;
  config.lambda2 = 1.0;
  config.seed = 7;
  const tsnmf::FitResult result = tsnmf::fit(data, config);

  const auto labels = tsnmf::predict_labels(result.model, config.k);
  const tsnmf::Scores s = tsnmf::score(labels, data.labels());
  std::cout << "iterations " << result.iterations << "\n"
            << "acc " << s.acc << "  nmi " << s.nmi << "  purity " << s.purity << "\n";
}
