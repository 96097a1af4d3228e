#ifndef MARKOV_MARKOV_HPP
#define MARKOV_MARKOV_HPP

#include "markov/bayes.hpp"
#include "markov/config.hpp"
#include "markov/density.hpp"
#include "markov/dirichlet.hpp"
#include "markov/kernel.hpp"
#include "markov/measure.hpp"
#include "markov/quadrature.hpp"
#include "markov/report.hpp"
#include "markov/rng.hpp"
#include "markov/space.hpp"
#include "markov/special.hpp"
#include "markov/statmodel.hpp"
#include "markov/stats.hpp"

#endif
