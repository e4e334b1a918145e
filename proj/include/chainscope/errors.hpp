#ifndef CHAINSCOPE_ERRORS_HPP
#define CHAINSCOPE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace chainscope {

// Error taxonomy maps onto CLI exit codes:
//   validation -> 2, capacity -> 3, hypothesis -> 4.
enum class ErrorKind { validation, capacity, hypothesis };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    const char* kind_name() const {
        switch (kind_) {
        case ErrorKind::validation: return "validation";
        case ErrorKind::capacity: return "capacity";
        case ErrorKind::hypothesis: return "hypothesis";
        }
        return "unknown";
    }

private:
    ErrorKind kind_;
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct EmptinessError : Error {
    explicit EmptinessError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& what) : Error(ErrorKind::capacity, what) {}
};

struct HypothesisError : Error {
    explicit HypothesisError(const std::string& what) : Error(ErrorKind::hypothesis, what) {}
};

// Raised when an epsilon-chain graph fails strong connectivity; carries the
// SCC decomposition so callers can inspect the obstruction.
struct NotChainTransitiveError : HypothesisError {
    NotChainTransitiveError(const std::string& what, std::vector<std::vector<int>> sccs_)
        : HypothesisError(what), sccs(std::move(sccs_)) {}
    std::vector<std::vector<int>> sccs;
};

struct NoFactorError : HypothesisError {
    explicit NoFactorError(const std::string& what) : HypothesisError(what) {}
};

struct NoWitnessError : HypothesisError {
    explicit NoWitnessError(const std::string& what) : HypothesisError(what) {}
};

struct InconsistentQuotientError : HypothesisError {
    explicit InconsistentQuotientError(const std::string& what) : HypothesisError(what) {}
};

struct DomainError : HypothesisError {
    explicit DomainError(const std::string& what) : HypothesisError(what) {}
};

} // namespace chainscope

#endif
