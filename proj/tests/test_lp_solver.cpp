#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "rhb/lp_solver.hpp"
#include "support.hpp"

using namespace rhb;
using Catch::Approx;

namespace {

StandardLP dense_lp(Sense sense, const Eigen::MatrixXd& A, std::vector<double> c, std::vector<double> b,
                    std::vector<ColumnBound> bounds = {}) {
    StandardLP lp;
    lp.sense = sense;
    lp.columns = std::make_shared<DenseColumns>(A, std::move(c));
    lp.rhs = std::move(b);
    lp.bounds = std::move(bounds);
    return lp;
}

// Feasible and bounded: b = A x0 with x0 >= 0, and the first row has positive weights.
struct RandomLP {
    Eigen::MatrixXd A;
    std::vector<double> b, c;
};

RandomLP random_lp(std::mt19937_64& rng, int m, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.5, 2.0), x(0.0, 1.0);
    RandomLP r;
    r.A.resize(m, n);
    for (int j = 0; j < n; ++j) {
        r.A(0, j) = pos(rng);
        for (int i = 1; i < m; ++i) r.A(i, j) = u(rng);
    }
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0[j] = x(rng) < 0.4 ? 0.0 : x(rng);
    const Eigen::VectorXd b = r.A * x0;
    r.b.assign(b.data(), b.data() + m);
    for (int j = 0; j < n; ++j) r.c.push_back(u(rng));
    return r;
}

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("solve examples", "[lp_solver]") {
    Eigen::MatrixXd A(1, 2);
    A << 1, 1;
    const auto lp = dense_lp(Sense::Maximize, A, {1, 0}, {1});
    const auto s = solve(lp);
    REQUIRE(s.status == LPStatus::Optimal);
    REQUIRE(s.x[0] == Approx(1.0).margin(1e-12));
    REQUIRE(s.x[1] == Approx(0.0).margin(1e-12));
    REQUIRE(s.objective == Approx(1.0).margin(1e-12));
    REQUIRE(s.y[0] == Approx(1.0).margin(1e-12));
    REQUIRE(verify_certificates(lp, s).within(1e-9));

    Eigen::MatrixXd B(1, 1);
    B << 1;
    const auto bad = dense_lp(Sense::Minimize, B, {0}, {-1});
    const auto f = solve(bad);
    REQUIRE(f.status == LPStatus::Infeasible);
    REQUIRE(f.farkas.size() == 1);
    REQUIRE(f.farkas[0] * 1.0 <= 1e-12);  // A^T f <= 0
    REQUIRE(f.farkas[0] * -1.0 > 0.0);     // b^T f > 0
    REQUIRE_THROWS_AS(verify_certificates(bad, f), DomainError);
}

TEST_CASE("unbounded LP returns an improving ray", "[lp_solver]") {
    Eigen::MatrixXd A(1, 3);
    A << 1, -1, 0.5;
    const auto lp = dense_lp(Sense::Minimize, A, {-1, 0, 1}, {1});
    const auto s = solve(lp);
    REQUIRE(s.status == LPStatus::Unbounded);
    REQUIRE(s.ray.size() == 3);
    REQUIRE(std::abs(s.ray[0] - s.ray[1] + 0.5 * s.ray[2]) <= 1e-12);
    for (double r : s.ray) REQUIRE(r >= 0.0);
    REQUIRE(-s.ray[0] + s.ray[2] < 0.0);
}

TEST_CASE("malformed LPs are rejected", "[lp_solver]") {
    Eigen::MatrixXd A(1, 2);
    A << 1, std::nan("");
    REQUIRE_THROWS_AS(solve(dense_lp(Sense::Minimize, A, {1, 1}, {1})), DomainError);
    Eigen::MatrixXd B(2, 2);
    B << 1, 1, 1, 1;
    REQUIRE_THROWS_AS(solve(dense_lp(Sense::Minimize, B, {1, 1}, {1})), DomainError);
    REQUIRE_THROWS_AS(DenseColumns(B, {1.0}), DomainError);
}

TEST_CASE("random LPs agree with vertex enumeration", "[lp_solver][property]") {
    std::mt19937_64 rng(17);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = trial < 40 ? 8 : 10;
        const int m = trial < 40 ? 5 : 4;
        const auto r = random_lp(rng, m, n);
        for (auto sense : {Sense::Minimize, Sense::Maximize}) {
            const auto lp = dense_lp(sense, r.A, r.c, r.b);
            const auto s = solve(lp);
            const auto v = testing::vertex_enumeration(r.A, r.b, r.c, sense == Sense::Maximize);
            REQUIRE(v.best);
            REQUIRE(s.status == LPStatus::Optimal);
            REQUIRE(s.objective == Approx(*v.best).margin(1e-9));
            REQUIRE(verify_certificates(lp, s).within(1e-9));
            ++compared;
        }
    }
    REQUIRE(compared == 120);
}

TEST_CASE("free columns match the split formulation", "[lp_solver][property]") {
    std::mt19937_64 rng(29);
    int compared = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = random_lp(rng, 3, 5);
        // column 4 made free; the oracle sees it as x+ - x-
        Eigen::MatrixXd split(3, 6);
        split << r.A, -r.A.col(4);
        auto c_split = r.c;
        c_split.push_back(-r.c[4]);
        std::vector<ColumnBound> bounds(5, ColumnBound::NonNegative);
        bounds[4] = ColumnBound::Free;
        const auto lp = dense_lp(Sense::Minimize, r.A, r.c, r.b, bounds);
        const auto s = solve(lp);
        const auto v = testing::vertex_enumeration(split, r.b, c_split, false);
        if (s.status == LPStatus::Unbounded) continue;
        REQUIRE(s.status == LPStatus::Optimal);
        REQUIRE(v.best);
        REQUIRE(s.objective == Approx(*v.best).margin(1e-9));
        REQUIRE(verify_certificates(lp, s).within(1e-9));
        ++compared;
    }
    REQUIRE(compared >= 10);
}

TEST_CASE("verify_certificates detects corrupted solutions", "[lp_solver]") {
    std::mt19937_64 rng(3);
    const auto r = random_lp(rng, 5, 8);
    const auto lp = dense_lp(Sense::Minimize, r.A, r.c, r.b);
    const auto s = solve(lp);
    REQUIRE(s.status == LPStatus::Optimal);

    std::size_t j = 0;
    while (s.x[j] <= 1e-6) ++j;
    auto bad = s;
    bad.x[j] += 1e-3;
    const double expected = r.A.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff() * 1e-3;
    REQUIRE(verify_certificates(lp, bad).primal == Approx(expected).epsilon(1e-6));

    auto dual_residual = [&](double eps) {
        auto d = s;
        for (double& y : d.y) y += eps;
        return verify_certificates(lp, d).dual;
    };
    const double r1 = dual_residual(1e-6), r2 = dual_residual(2e-6);
    REQUIRE(r1 > 0.0);
    REQUIRE(r2 / r1 == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("solves are deterministic and basis-invariant under objective scaling", "[lp_solver][property]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = random_lp(rng, 5, 8);
        const auto lp = dense_lp(Sense::Minimize, r.A, r.c, r.b);
        const auto a = solve(lp), b = solve(lp);
        REQUIRE(a.basis == b.basis);
        REQUIRE(a.x == b.x);
        REQUIRE(a.y == b.y);
        auto scaled = r.c;
        for (double& v : scaled) v *= 3.7;
        const auto c = solve(dense_lp(Sense::Minimize, r.A, scaled, r.b));
        REQUIRE(sorted(c.basis) == sorted(a.basis));
        REQUIRE(c.objective == Approx(3.7 * a.objective).margin(1e-9));
    }
}

TEST_CASE("degenerate LPs terminate with valid certificates", "[lp_solver][property]") {
    // assignment polytope: every vertex is highly degenerate
    const int k = 4;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * k, k * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            A(i, i * k + j) = 1.0;
            A(k + j, i * k + j) = 1.0;
        }
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> w(1, 3);
    std::vector<double> c;
    for (int j = 0; j < k * k; ++j) c.push_back(w(rng));
    // one redundant row removed to keep full row rank
    const Eigen::MatrixXd Ar = A.topRows(2 * k - 1);
    const auto lp = dense_lp(Sense::Minimize, Ar, c, std::vector<double>(2 * k - 1, 1.0));
    const auto s = solve(lp);
    REQUIRE(s.status == LPStatus::Optimal);
    REQUIRE(verify_certificates(lp, s).within(1e-9));
    REQUIRE(s.primal_degenerate);
    double best = 1e300;
    std::vector<int> perm{0, 1, 2, 3};
    do {
        double v = 0.0;
        for (int i = 0; i < k; ++i) v += c[static_cast<std::size_t>(i * k + perm[static_cast<std::size_t>(i)])];
        best = std::min(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    REQUIRE(s.objective == Approx(best).margin(1e-9));
    for (const auto& y : enumerate_alternative_duals(lp, s)) {
        double by = 0.0;
        for (double v : y) by += v;
        REQUIRE(by == Approx(best).margin(1e-9));
    }
}
