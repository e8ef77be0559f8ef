#pragma once

#include <string>

namespace qla {

enum class Method { enumeration, quadrature, monte_carlo };

const char* method_name(Method m);

// A numeric result with its statistical error (one standard deviation) and a
// deterministic bound on the truncation/discretization error.
struct Estimate {
    double value = 0.0;
    double stat_err = 0.0;
    double trunc_bound = 0.0;
    Method method = Method::enumeration;
    std::string warning;
};

}  // namespace qla
