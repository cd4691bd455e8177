#ifndef RAGA_RAGA_HPP
#define RAGA_RAGA_HPP

#include "raga/aggregation.hpp"
#include "raga/attacks.hpp"
#include "raga/client.hpp"
#include "raga/config.hpp"
#include "raga/csv.hpp"
#include "raga/data.hpp"
#include "raga/experiment.hpp"
#include "raga/measure.hpp"
#include "raga/models.hpp"
#include "raga/rng.hpp"
#include "raga/server.hpp"
#include "raga/theory.hpp"
#include "raga/vec.hpp"
#include "raga/verify.hpp"

#endif // RAGA_RAGA_HPP
