#include "latsel/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <json.hpp>

namespace latsel {

std::string to_string(PenaltyKind kind) {
    switch (kind) {
    case PenaltyKind::none: return "none";
    case PenaltyKind::cardinality: return "cardinality";
    case PenaltyKind::range: return "range";
    case PenaltyKind::interval: return "interval";
    }
    return "none";
}

PenaltyKind parse_penalty(const std::string& name) {
    if (name == "none") return PenaltyKind::none;
    if (name == "cardinality") return PenaltyKind::cardinality;
    if (name == "range") return PenaltyKind::range;
    if (name == "interval") return PenaltyKind::interval;
    throw InvalidArgument("unknown penalty '" + name + "'");
}

namespace {

void check_lambda(double lambda, const char* who) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument(std::string(who) + ": lambda must be >= 0");
}

}  // namespace

SetFunction cardinality_penalty_g(std::size_t n, double lambda) {
    check_lambda(lambda, "cardinality_penalty_g");
    return SetFunction(n, [lambda](const Subset& a) { return lambda * static_cast<double>(a.size()); });
}

SetFunction range_penalty_g(std::size_t n, double lambda) {
    check_lambda(lambda, "range_penalty_g");
    return SetFunction(n, [n, lambda](const Subset& a) {
        auto idx = a.indices();
        if (idx.empty()) return 0.0;
        const double span = static_cast<double>(idx.back() - idx.front());
        return lambda * (static_cast<double>(n - 1) + span + static_cast<double>(idx.size()));
    });
}

SetFunction interval_penalty_g(std::size_t n, double lambda) {
    check_lambda(lambda, "interval_penalty_g");
    return SetFunction(n, [lambda](const Subset& a) {
        auto idx = a.indices();
        std::size_t runs = 0;
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (k == 0 || idx[k] != idx[k - 1] + 1) ++runs;
        return lambda * static_cast<double>(idx.size() + runs);
    });
}

SetFunction make_penalty(PenaltyKind kind, std::size_t n, double lambda) {
    switch (kind) {
    case PenaltyKind::cardinality: return cardinality_penalty_g(n, lambda);
    case PenaltyKind::range: return range_penalty_g(n, lambda);
    case PenaltyKind::interval: return interval_penalty_g(n, lambda);
    case PenaltyKind::none: break;
    }
    return zero_function(n);
}

Eigen::VectorXd bump_signal(std::size_t n) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    struct Bump {
        double center, half_width, height;
    };
    const Bump bumps[] = {{0.25, 0.10, 1.0}, {0.65, 0.15, 0.6}};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.25 : static_cast<double>(i) / static_cast<double>(n - 1);
        for (const auto& bp : bumps) {
            const double r = (t - bp.center) / bp.half_width;
            if (std::abs(r) < 1.0) b[static_cast<Eigen::Index>(i)] += bp.height * 0.5 * (1.0 + std::cos(std::numbers::pi * r));
        }
    }
    return b;
}

InstanceSpec gen_regression_instance(std::size_t n, std::uint64_t seed, double lambda, PenaltyKind penalty) {
    if (n == 0) throw InvalidArgument("gen_regression_instance: n must be >= 1");
    check_lambda(lambda, "gen_regression_instance");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 0.0);
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd gram;
    Eigen::MatrixXd upper;
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        Eigen::MatrixXd c(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) c(i, j) = unif(rng);
        gram = c + c.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(m, m);
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() == Eigen::Success) {
            upper = llt.matrixU();
            ok = true;
        }
    }
    if (!ok) throw NumericalError("gen_regression_instance: no positive definite draw in 100 attempts");

    InstanceSpec inst;
    inst.n = n;
    inst.seed = seed;
    inst.lambda = lambda;
    inst.penalty = penalty;
    inst.b_target = bump_signal(n);
    inst.design = upper;
    Eigen::VectorXd p = -2.0 * upper.transpose() * inst.b_target;
    inst.fspec = QuadraticSpec(gram, p, inst.b_target.squaredNorm(), SignMode::nonnegative);
    inst.g = make_penalty(penalty, n, lambda);
    return inst;
}

InstanceSpec denoising_instance(const Eigen::VectorXd& y, double mu_smooth, double lambda) {
    if (!(mu_smooth >= 0.0)) throw InvalidArgument("denoising_instance: mu_smooth must be >= 0");
    check_lambda(lambda, "denoising_instance");
    const auto m = y.size();
    Eigen::MatrixXd q = 0.5 * Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        q(i, i) += mu_smooth;
        q(i + 1, i + 1) += mu_smooth;
        q(i, i + 1) -= mu_smooth;
        q(i + 1, i) -= mu_smooth;
    }
    InstanceSpec inst;
    inst.n = static_cast<std::size_t>(m);
    inst.lambda = lambda;
    inst.mu_smooth = mu_smooth;
    inst.penalty = PenaltyKind::interval;
    inst.b_target = y;
    inst.fspec = QuadraticSpec(q, -y, 0.5 * y.squaredNorm(), SignMode::free);
    inst.g = interval_penalty_g(inst.n, lambda);
    return inst;
}

InstanceSpec gen_denoising_instance(std::size_t n, std::uint64_t seed, double mu_smooth, double lambda,
                                    double noise_variance) {
    if (n == 0) throw InvalidArgument("gen_denoising_instance: n must be >= 1");
    if (!(noise_variance >= 0.0)) throw InvalidArgument("gen_denoising_instance: noise variance must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance));
    Eigen::VectorXd y = bump_signal(n);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise(rng);
    auto inst = denoising_instance(y, mu_smooth, lambda);
    inst.seed = seed;
    return inst;
}

LiftedInstance lift_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    if (a.rows() != b.size()) throw InvalidArgument("lift_least_squares: A has " + std::to_string(a.rows()) +
                                                    " rows but b has length " + std::to_string(b.size()));
    if (!a.allFinite() || !b.allFinite()) throw InvalidArgument("lift_least_squares: non-finite input");
    const auto n = a.cols();
    Eigen::MatrixXd lifted(a.rows(), 2 * n);
    lifted << a, -a;
    Eigen::MatrixXd q = lifted.transpose() * lifted;
    q = 0.5 * (q + q.transpose()).eval();
    Eigen::VectorXd p = -2.0 * lifted.transpose() * b;

    LiftedInstance out;
    out.offdiag_nonpositive = check_hessian_offdiag(q);
    auto& inst = out.instance;
    inst.n = static_cast<std::size_t>(2 * n);
    inst.penalty = PenaltyKind::none;
    inst.b_target = b;
    inst.design = lifted;
    inst.fspec = QuadraticSpec(q, p, b.squaredNorm(), SignMode::nonnegative, true);
    inst.g = zero_function(inst.n);
    return out;
}

double coherence(const Eigen::MatrixXd& a, bool absolute) {
    Eigen::MatrixXd normalized = a;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double norm = a.col(j).norm();
        if (!(norm > 0.0)) throw InvalidArgument("coherence: column " + std::to_string(j) + " is zero");
        normalized.col(j) /= norm;
    }
    Eigen::MatrixXd gram = normalized.transpose() * normalized;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
        for (Eigen::Index j = 0; j < gram.cols(); ++j)
            if (i != j) best = std::max(best, absolute ? std::abs(gram(i, j)) : gram(i, j));
    return std::isfinite(best) ? best : 0.0;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != c) throw InvalidArgument("instance JSON: ragged matrix");
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return m;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const nlohmann::json& arr) {
    auto vals = arr.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

std::string instance_to_json(const InstanceSpec& inst) {
    nlohmann::json j;
    j["n"] = inst.n;
    j["seed"] = inst.seed;
    j["lambda"] = inst.lambda;
    j["mu_smooth"] = inst.mu_smooth;
    j["penalty"] = to_string(inst.penalty);
    j["sign_mode"] = inst.fspec.mode() == SignMode::free ? "free" : "nonnegative";
    j["Q"] = matrix_json(inst.fspec.q());
    j["p"] = vector_json(inst.fspec.p());
    j["offset"] = inst.fspec.offset();
    j["b_target"] = vector_json(inst.b_target);
    j["design"] = matrix_json(inst.design);
    return j.dump(1);
}

InstanceSpec instance_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("instance JSON: ") + e.what());
    }
    try {
        InstanceSpec inst;
        inst.n = j.at("n").get<std::size_t>();
        inst.seed = j.at("seed").get<std::uint64_t>();
        inst.lambda = j.at("lambda").get<double>();
        inst.mu_smooth = j.at("mu_smooth").get<double>();
        inst.penalty = parse_penalty(j.at("penalty").get<std::string>());
        const auto mode = j.at("sign_mode").get<std::string>() == "free" ? SignMode::free : SignMode::nonnegative;
        inst.fspec = QuadraticSpec(matrix_from(j.at("Q")), vector_from(j.at("p")), j.at("offset").get<double>(), mode,
                                   true);
        inst.b_target = vector_from(j.at("b_target"));
        inst.design = matrix_from(j.at("design"));
        if (inst.fspec.dim() != inst.n) throw InvalidArgument("instance JSON: Q does not match n");
        inst.g = make_penalty(inst.penalty, inst.n, inst.lambda);
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("instance JSON: ") + e.what());
    }
}

}  // namespace latsel
