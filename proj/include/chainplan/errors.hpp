#pragma once

#include <stdexcept>
#include <string>

namespace chainplan {

/// Base class for all chainplan errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CHAINPLAN_ERROR(Name)                                            \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

// indicators
CHAINPLAN_ERROR(DegenerateIndicator);
CHAINPLAN_ERROR(NonFinite);
CHAINPLAN_ERROR(WeightSumViolation);
CHAINPLAN_ERROR(NonPositiveNormalizer);
CHAINPLAN_ERROR(ZeroDenominator);

// risk
CHAINPLAN_ERROR(RankDeficient);
CHAINPLAN_ERROR(Separation);
CHAINPLAN_ERROR(NoConvergence);

// network
CHAINPLAN_ERROR(EmptyGraph);
CHAINPLAN_ERROR(NegativeWeight);
CHAINPLAN_ERROR(EmptyCandidateSet);

// bilevel
CHAINPLAN_ERROR(DimensionMismatch);
CHAINPLAN_ERROR(InfeasibleEvaluation);
CHAINPLAN_ERROR(EmptyResponse);
CHAINPLAN_ERROR(GridTooLarge);
CHAINPLAN_ERROR(NoFeasibleSolution);

// swarm
CHAINPLAN_ERROR(NoFeasibleParticle);
CHAINPLAN_ERROR(MetricOutOfRange);

// scenarios
CHAINPLAN_ERROR(InvalidConfig);

#undef CHAINPLAN_ERROR

} // namespace chainplan
