#include "qla/estimate.hpp"

namespace qla {

const char* method_name(Method m) {
    switch (m) {
        case Method::enumeration: return "enumeration";
        case Method::quadrature: return "quadrature";
        case Method::monte_carlo: return "monte-carlo";
    }
    return "?";
}

}  // namespace qla
