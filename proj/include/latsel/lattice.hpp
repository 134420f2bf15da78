#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace latsel {

/// Raised for malformed input: dimension mismatch, bad parameter ranges,
/// non-permutations, sizes above a brute-force cap.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot produce a usable answer.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A subset of the ground set {0, ..., n-1}, stored as a little-endian
/// multi-word bitmask (bit i of word i/64 is element i).
class Subset {
  public:
    Subset() = default;
    explicit Subset(std::size_t n);

    static Subset full(std::size_t n);
    static Subset from_indices(std::size_t n, std::span<const std::size_t> indices);
    static Subset from_indices(std::size_t n, std::initializer_list<std::size_t> indices);
    /// Only for n <= 64.
    static Subset from_mask(std::size_t n, std::uint64_t mask);
    /// Parses the "0x..." form produced by to_hex().
    static Subset from_hex(std::size_t n, std::string_view hex);

    std::size_t ground_size() const { return n_; }
    std::size_t size() const;
    bool empty() const;

    bool contains(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void insert(std::size_t i);
    void erase(std::size_t i);
    Subset with(std::size_t i) const;
    Subset without(std::size_t i) const;

    std::vector<std::size_t> indices() const;
    bool is_subset_of(const Subset& other) const;

    Subset operator|(const Subset& other) const;
    Subset operator&(const Subset& other) const;
    /// Set difference.
    Subset operator-(const Subset& other) const;
    Subset complement() const;

    /// Low 64 bits of the mask.
    std::uint64_t mask() const { return words_.empty() ? 0 : words_[0]; }
    std::span<const std::uint64_t> words() const { return words_; }

    /// "0x"-prefixed lowercase hex of the whole mask, most significant digit
    /// first, no leading zeros ("0x0" for the empty set).
    std::string to_hex() const;

    std::size_t hash() const;

    friend bool operator==(const Subset&, const Subset&) = default;

  private:
    void check_index(std::size_t i) const;
    void check_same_ground(const Subset& other) const;

    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Numeric order of the bitmasks; the "lexicographic" tie-break.
bool mask_less(const Subset& a, const Subset& b);

/// Total order used to pick among equal-valued minimizers: smaller
/// cardinality first, then smaller bitmask.
bool minimal_order_less(const Subset& a, const Subset& b);

struct SubsetHash {
    std::size_t operator()(const Subset& s) const noexcept { return s.hash(); }
};

/// Memoizing handle to a set function F : 2^[n] -> R.
///
/// Copies share the evaluator and the memo table. The memo accepts
/// concurrent readers; insertions are serialized and idempotent.
class SetFunction {
  public:
    using Evaluator = std::function<double(const Subset&)>;

    SetFunction() = default;
    SetFunction(std::size_t n, Evaluator evaluator);

    double operator()(const Subset& a) const;

    std::size_t ground_size() const;
    /// Number of times the underlying evaluator ran (memo misses).
    std::size_t oracle_calls() const;
    std::size_t cache_size() const;
    bool valid() const { return static_cast<bool>(state_); }

  private:
    struct State;
    std::shared_ptr<State> state_;
};

SetFunction modular_function(const Eigen::VectorXd& weights, double offset = 0.0);
SetFunction zero_function(std::size_t n);

/// F restricted to the interval [lower, upper]: a set function on the
/// |upper \ lower| free elements, B -> F(lower ∪ B). `free_elements` receives
/// the parent indices of the new ground set, in increasing order.
SetFunction restrict_to_interval(const SetFunction& f, const Subset& lower, const Subset& upper,
                                 std::vector<std::size_t>* free_elements = nullptr);

/// Subgradient of the Lovász extension given by the greedy rule.
struct BaseVertex {
    Eigen::VectorXd weights;
    std::vector<std::size_t> ordering;
    /// F(S_0), ..., F(S_n) along the ordering; S_0 is the empty set.
    std::vector<double> chain_values;
};

/// Sorts indices by nonincreasing u, ties broken by ascending index.
std::vector<std::size_t> descending_order(const Eigen::VectorXd& u);
/// Sorts indices by nondecreasing u, ties broken by ascending index.
std::vector<std::size_t> ascending_order(const Eigen::VectorXd& u);

double lovasz_extension(const SetFunction& f, const Eigen::VectorXd& u);
BaseVertex greedy_base_vertex(const SetFunction& f, std::span<const std::size_t> ordering);

struct StructureCheckOptions {
    double tol = 1e-8;
    std::size_t max_n = 12;
};

bool check_submodular_bruteforce(const SetFunction& f, const StructureCheckOptions& opts = {});
bool check_monotone_bruteforce(const SetFunction& f, const StructureCheckOptions& opts = {});

/// True iff every off-diagonal entry of Q is <= 0, the second-order test for
/// submodularity of a quadratic on R^n. Entries up to 1e-12·max(1, max|Q|)
/// count as rounding noise. Rejects asymmetric input.
bool check_hessian_offdiag(const Eigen::MatrixXd& q);

}  // namespace latsel
