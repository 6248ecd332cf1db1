#ifndef TSNMF_TSNMF_HPP
#define TSNMF_TSNMF_HPP

#include "tsnmf/baselines.hpp"
#include "tsnmf/common.hpp"
#include "tsnmf/data.hpp"
#include "tsnmf/dataset.hpp"
#include "tsnmf/experiment.hpp"
#include "tsnmf/graph.hpp"
#include "tsnmf/io.hpp"
#include "tsnmf/kmeans.hpp"
#include "tsnmf/linalg.hpp"
#include "tsnmf/metrics.hpp"
#include "tsnmf/model_io.hpp"
#include "tsnmf/solver.hpp"

#endif  // TSNMF_TSNMF_HPP
