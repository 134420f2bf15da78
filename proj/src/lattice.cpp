#include "latsel/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <unordered_map>

namespace latsel {

namespace {

std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

}  // namespace

// ---------------------------------------------------------------- Subset

Subset::Subset(std::size_t n) : n_(n), words_(word_count(n), 0) {}

Subset Subset::full(std::size_t n) {
    Subset s(n);
    for (std::size_t w = 0; w < s.words_.size(); ++w) s.words_[w] = ~std::uint64_t{0};
    if (n % 64 != 0) s.words_.back() = (std::uint64_t{1} << (n % 64)) - 1;
    return s;
}

Subset Subset::from_indices(std::size_t n, std::span<const std::size_t> indices) {
    Subset s(n);
    for (auto i : indices) s.insert(i);
    return s;
}

Subset Subset::from_indices(std::size_t n, std::initializer_list<std::size_t> indices) {
    return from_indices(n, std::span<const std::size_t>(indices.begin(), indices.size()));
}

Subset Subset::from_mask(std::size_t n, std::uint64_t mask) {
    if (n > 64) throw InvalidArgument("Subset::from_mask requires n <= 64");
    if (n < 64 && (mask >> n) != 0) throw InvalidArgument("Subset::from_mask: bit outside ground set");
    Subset s(n);
    if (n > 0) s.words_[0] = mask;
    return s;
}

Subset Subset::from_hex(std::size_t n, std::string_view hex) {
    if (hex.size() < 3 || hex[0] != '0' || (hex[1] != 'x' && hex[1] != 'X'))
        throw InvalidArgument("Subset::from_hex: expected 0x prefix");
    Subset s(n);
    std::size_t bit = 0;
    for (auto it = hex.rbegin(); it != hex.rend() - 2; ++it, bit += 4) {
        char c = *it;
        unsigned v;
        if (c >= '0' && c <= '9')
            v = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v = static_cast<unsigned>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F')
            v = static_cast<unsigned>(c - 'A' + 10);
        else
            throw InvalidArgument("Subset::from_hex: bad digit");
        for (unsigned b = 0; b < 4; ++b) {
            if ((v >> b) & 1u) {
                if (bit + b >= n) throw InvalidArgument("Subset::from_hex: bit outside ground set");
                s.insert(bit + b);
            }
        }
    }
    return s;
}

std::size_t Subset::size() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

bool Subset::empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

void Subset::check_index(std::size_t i) const {
    if (i >= n_) throw InvalidArgument("Subset: index " + std::to_string(i) + " outside ground set of size " + std::to_string(n_));
}

void Subset::check_same_ground(const Subset& other) const {
    if (n_ != other.n_) throw InvalidArgument("Subset: ground-set size mismatch");
}

void Subset::insert(std::size_t i) {
    check_index(i);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
}

void Subset::erase(std::size_t i) {
    check_index(i);
    words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
}

Subset Subset::with(std::size_t i) const {
    Subset s = *this;
    s.insert(i);
    return s;
}

Subset Subset::without(std::size_t i) const {
    Subset s = *this;
    s.erase(i);
    return s;
}

std::vector<std::size_t> Subset::indices() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (std::size_t w = 0; w < words_.size(); ++w) {
        auto bits = words_[w];
        while (bits) {
            out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
            bits &= bits - 1;
        }
    }
    return out;
}

bool Subset::is_subset_of(const Subset& other) const {
    check_same_ground(other);
    for (std::size_t w = 0; w < words_.size(); ++w)
        if (words_[w] & ~other.words_[w]) return false;
    return true;
}

Subset Subset::operator|(const Subset& other) const {
    check_same_ground(other);
    Subset s = *this;
    for (std::size_t w = 0; w < words_.size(); ++w) s.words_[w] |= other.words_[w];
    return s;
}

Subset Subset::operator&(const Subset& other) const {
    check_same_ground(other);
    Subset s = *this;
    for (std::size_t w = 0; w < words_.size(); ++w) s.words_[w] &= other.words_[w];
    return s;
}

Subset Subset::operator-(const Subset& other) const {
    check_same_ground(other);
    Subset s = *this;
    for (std::size_t w = 0; w < words_.size(); ++w) s.words_[w] &= ~other.words_[w];
    return s;
}

Subset Subset::complement() const { return full(n_) - *this; }

std::string Subset::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t w = words_.size(); w-- > 0;) {
        for (int nib = 15; nib >= 0; --nib) {
            unsigned v = static_cast<unsigned>((words_[w] >> (4 * nib)) & 0xf);
            if (out.empty() && v == 0) continue;
            out.push_back(digits[v]);
        }
    }
    if (out.empty()) out = "0";
    return "0x" + out;
}

std::size_t Subset::hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ n_;
    for (auto w : words_) {
        h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xbf58476d1ce4e5b9ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 31));
}

bool mask_less(const Subset& a, const Subset& b) {
    auto wa = a.words();
    auto wb = b.words();
    if (wa.size() != wb.size()) return wa.size() < wb.size();
    for (std::size_t w = wa.size(); w-- > 0;)
        if (wa[w] != wb[w]) return wa[w] < wb[w];
    return false;
}

bool minimal_order_less(const Subset& a, const Subset& b) {
    auto ca = a.size();
    auto cb = b.size();
    if (ca != cb) return ca < cb;
    return mask_less(a, b);
}

// ----------------------------------------------------------- SetFunction

struct SetFunction::State {
    std::size_t n;
    Evaluator eval;
    mutable std::shared_mutex mutex;
    std::unordered_map<Subset, double, SubsetHash> memo;
    std::atomic<std::size_t> calls{0};
};

SetFunction::SetFunction(std::size_t n, Evaluator evaluator) : state_(std::make_shared<State>()) {
    if (!evaluator) throw InvalidArgument("SetFunction: empty evaluator");
    state_->n = n;
    state_->eval = std::move(evaluator);
}

double SetFunction::operator()(const Subset& a) const {
    if (!state_) throw InvalidArgument("SetFunction: uninitialized handle");
    if (a.ground_size() != state_->n)
        throw InvalidArgument("SetFunction: subset over " + std::to_string(a.ground_size()) +
                              " elements, function over " + std::to_string(state_->n));
    {
        std::shared_lock lock(state_->mutex);
        auto it = state_->memo.find(a);
        if (it != state_->memo.end()) return it->second;
    }
    double v = state_->eval(a);
    state_->calls.fetch_add(1, std::memory_order_relaxed);
    std::unique_lock lock(state_->mutex);
    return state_->memo.try_emplace(a, v).first->second;
}

std::size_t SetFunction::ground_size() const { return state_ ? state_->n : 0; }

std::size_t SetFunction::oracle_calls() const { return state_ ? state_->calls.load() : 0; }

std::size_t SetFunction::cache_size() const {
    if (!state_) return 0;
    std::shared_lock lock(state_->mutex);
    return state_->memo.size();
}

SetFunction modular_function(const Eigen::VectorXd& weights, double offset) {
    return SetFunction(static_cast<std::size_t>(weights.size()), [weights, offset](const Subset& a) {
        double v = offset;
        for (auto i : a.indices()) v += weights[static_cast<Eigen::Index>(i)];
        return v;
    });
}

SetFunction zero_function(std::size_t n) {
    return SetFunction(n, [](const Subset&) { return 0.0; });
}

SetFunction restrict_to_interval(const SetFunction& f, const Subset& lower, const Subset& upper,
                                 std::vector<std::size_t>* free_elements) {
    if (lower.ground_size() != f.ground_size() || upper.ground_size() != f.ground_size())
        throw InvalidArgument("restrict_to_interval: dimension mismatch");
    if (!lower.is_subset_of(upper)) throw InvalidArgument("restrict_to_interval: lower not contained in upper");
    auto free = (upper - lower).indices();
    if (free_elements) *free_elements = free;
    return SetFunction(free.size(), [f, lower, free](const Subset& b) {
        Subset a = lower;
        for (auto j : b.indices()) a.insert(free[j]);
        return f(a);
    });
}

// ------------------------------------------------------ Lovász extension

std::vector<std::size_t> descending_order(const Eigen::VectorXd& u) {
    std::vector<std::size_t> order(static_cast<std::size_t>(u.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return u[static_cast<Eigen::Index>(a)] > u[static_cast<Eigen::Index>(b)];
    });
    return order;
}

std::vector<std::size_t> ascending_order(const Eigen::VectorXd& u) {
    std::vector<std::size_t> order(static_cast<std::size_t>(u.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return u[static_cast<Eigen::Index>(a)] < u[static_cast<Eigen::Index>(b)];
    });
    return order;
}

BaseVertex greedy_base_vertex(const SetFunction& f, std::span<const std::size_t> ordering) {
    const std::size_t n = f.ground_size();
    if (ordering.size() != n) throw InvalidArgument("greedy_base_vertex: ordering length differs from ground-set size");
    std::vector<char> seen(n, 0);
    for (auto i : ordering) {
        if (i >= n || seen[i]) throw InvalidArgument("greedy_base_vertex: ordering is not a permutation");
        seen[i] = 1;
    }
    BaseVertex v;
    v.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    v.ordering.assign(ordering.begin(), ordering.end());
    v.chain_values.reserve(n + 1);
    Subset s(n);
    double prev = f(s);
    v.chain_values.push_back(prev);
    for (auto i : ordering) {
        s.insert(i);
        double cur = f(s);
        v.weights[static_cast<Eigen::Index>(i)] = cur - prev;
        v.chain_values.push_back(cur);
        prev = cur;
    }
    return v;
}

double lovasz_extension(const SetFunction& f, const Eigen::VectorXd& u) {
    if (static_cast<std::size_t>(u.size()) != f.ground_size())
        throw InvalidArgument("lovasz_extension: vector length differs from ground-set size");
    auto order = descending_order(u);
    auto v = greedy_base_vertex(f, order);
    return v.chain_values.front() + u.dot(v.weights);
}

// ------------------------------------------------------ structural checks

namespace {

std::vector<double> tabulate(const SetFunction& f, const StructureCheckOptions& opts, const char* who) {
    const std::size_t n = f.ground_size();
    if (n > opts.max_n)
        throw InvalidArgument(std::string(who) + ": n = " + std::to_string(n) + " exceeds brute-force cap " +
                              std::to_string(opts.max_n));
    std::vector<double> table(std::size_t{1} << n);
    for (std::uint64_t m = 0; m < table.size(); ++m) table[m] = f(Subset::from_mask(n, m));
    return table;
}

}  // namespace

bool check_submodular_bruteforce(const SetFunction& f, const StructureCheckOptions& opts) {
    auto t = tabulate(f, opts, "check_submodular_bruteforce");
    const std::uint64_t count = t.size();
    for (std::uint64_t a = 0; a < count; ++a)
        for (std::uint64_t b = a + 1; b < count; ++b)
            if (t[a] + t[b] < t[a | b] + t[a & b] - opts.tol) return false;
    return true;
}

bool check_monotone_bruteforce(const SetFunction& f, const StructureCheckOptions& opts) {
    auto t = tabulate(f, opts, "check_monotone_bruteforce");
    const std::uint64_t count = t.size();
    for (std::uint64_t b = 0; b < count; ++b) {
        // every submask a of b
        for (std::uint64_t a = b;; a = (a - 1) & b) {
            if (t[a] > t[b] + opts.tol) return false;
            if (a == 0) break;
        }
    }
    return true;
}

bool check_hessian_offdiag(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols()) throw InvalidArgument("check_hessian_offdiag: matrix is not square");
    if (q.size() == 0) return true;
    const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("check_hessian_offdiag: matrix is not symmetric");
    for (Eigen::Index i = 0; i < q.rows(); ++i)
        for (Eigen::Index j = 0; j < q.cols(); ++j)
            if (i != j && q(i, j) > 1e-12 * scale) return false;
    return true;
}

}  // namespace latsel
