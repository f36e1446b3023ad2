#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "trackfuse/assignment.hpp"
#include "trackfuse/bp.hpp"
#include "trackfuse/errors.hpp"
#include "trackfuse/experiment.hpp"
#include "trackfuse/mda.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/rng.hpp"
#include "trackfuse/transform.hpp"

namespace trackfuse {

namespace {

constexpr std::uint64_t kCheckSeed = 20240101;

Matrix random_matrix(Rng& rng, int rows, int cols) {
    Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = standard_normal(rng);
    return m;
}

Matrix random_spd(Rng& rng, int n) {
    const Matrix b = random_matrix(rng, n, n);
    return symmetrize(b * b.transpose() + 0.1 * Matrix::Identity(n, n));
}

int uniform_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(std::floor(uniform01(rng) * (hi - lo + 1)));
}

struct Reporter {
    std::ostream& out;
    bool all_ok = true;

    void line(const std::string& name, bool ok, double worst, const std::string& extra = "") {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %-40s worst=%.3e %s", ok ? "PASS" : "FAIL", name.c_str(), worst,
                      extra.c_str());
        out << buf << "\n";
        all_ok = all_ok && ok;
    }
};

void check_lemmas(Reporter& rep) {
    Rng rng = make_rng(kCheckSeed, 0, 0, 0, RngPurpose::Test);
    constexpr int kInstances = 200;
    double w1 = 0.0, w2 = 0.0, w3 = 0.0, w4 = 0.0;
    for (int k = 0; k < kInstances; ++k) {
        const int m = uniform_int(rng, 1, 4);
        const int p = uniform_int(rng, m, 6);
        const Matrix S = random_spd(rng, m);
        const Matrix A = random_matrix(rng, p, m);
        const Matrix lhs = A.transpose() * pseudo_inverse(symmetrize(A * S * A.transpose())) * A;
        w1 = std::max(w1, relative_error(lhs, S.inverse()));

        const PsdSpectrum spec = psd_spectrum(symmetrize(A * S * A.transpose()));
        const double expect = std::log(S.determinant()) + std::log((A.transpose() * A).determinant());
        w2 = std::max(w2, std::abs(spec.log_pdet - expect) / std::max(1.0, std::abs(expect)));

        const double vol = 0.5 * std::log((A.transpose() * A).determinant());
        w3 = std::max(w3, std::abs(log_volume_scale(A) - vol) / std::max(1.0, std::abs(vol)));
    }
    for (int k = 0; k < kInstances; ++k) {
        const int sensors = uniform_int(rng, 2, 3);
        std::vector<MeasurementBatch> raw(sensors), enc(sensors);
        std::vector<const MeasurementBatch*> praw, penc;
        std::vector<int> idx;
        for (int l = 0; l < sensors; ++l) {
            MeasurementBatch& b = raw[static_cast<std::size_t>(l)];
            b.sensor_id = l + 1;
            b.H = random_matrix(rng, 2, 4);
            b.R = random_spd(rng, 2);
            b.log_clutter_density = -10.0;
            b.z.push_back(random_matrix(rng, 2, 1).col(0) * 10.0);
            const Matrix A = random_matrix(rng, uniform_int(rng, 2, 3), 2);
            enc[static_cast<std::size_t>(l)] = encode_batch(b, TransformKind::GenericFullColumnRank, &A);
            idx.push_back(1);
        }
        for (int l = 0; l < sensors; ++l) {
            praw.push_back(&raw[static_cast<std::size_t>(l)]);
            penc.push_back(&enc[static_cast<std::size_t>(l)]);
        }
        w4 = std::max(w4, relative_error(mle_state(penc, idx), mle_state(praw, idx)));
    }
    rep.line("pinv identity A^T (A S A^T)^+ A = S^-1", w1 <= 1e-8, w1);
    rep.line("eigenvalue product det(S) det(A^T A)", w2 <= 1e-8, w2);
    rep.line("clutter volume ratio sqrt det(A^T A)", w3 <= 1e-8, w3);
    rep.line("MLE raw equals MLE transformed", w4 <= 1e-8, w4);
}

// Exhaustive search over one tuple per first-dimension element.
double enumerate_optimum(const AssignmentTable& t) {
    std::vector<std::vector<std::size_t>> owned(static_cast<std::size_t>(t.dim_sizes[0]) + 1);
    for (std::size_t r = 0; r < t.size(); ++r) owned[static_cast<std::size_t>(t.tuples[r][0])].push_back(r);
    std::vector<std::vector<char>> used(t.dims());
    for (std::size_t d = 0; d < t.dims(); ++d) used[d].assign(static_cast<std::size_t>(t.dim_sizes[d]) + 1, 0);
    double best = kInf;
    std::function<void(int, double)> rec = [&](int elem, double acc) {
        if (elem > t.dim_sizes[0]) {
            best = std::min(best, acc);
            return;
        }
        for (std::size_t r : owned[static_cast<std::size_t>(elem)]) {
            const auto& tup = t.tuples[r];
            bool ok = true;
            for (std::size_t d = 1; d < t.dims(); ++d) {
                if (tup[d] != 0 && used[d][static_cast<std::size_t>(tup[d])]) ok = false;
            }
            if (!ok) continue;
            for (std::size_t d = 1; d < t.dims(); ++d) used[d][static_cast<std::size_t>(tup[d])] = tup[d] != 0;
            rec(elem + 1, acc + t.costs[r]);
            for (std::size_t d = 1; d < t.dims(); ++d) {
                if (tup[d] != 0) used[d][static_cast<std::size_t>(tup[d])] = 0;
            }
        }
    };
    rec(1, 0.0);
    return best;
}

AssignmentTable random_table(Rng& rng) {
    AssignmentTable t;
    t.dim_sizes = {uniform_int(rng, 1, 5), uniform_int(rng, 1, 5), uniform_int(rng, 1, 5)};
    t.first_mandatory = true;
    for (int i = 1; i <= t.dim_sizes[0]; ++i) {
        t.add({i, 0, 0}, 0.0);
        for (int j = 0; j <= t.dim_sizes[1]; ++j) {
            for (int k = 0; k <= t.dim_sizes[2]; ++k) {
                if (j == 0 && k == 0) continue;
                if (uniform01(rng) < 0.6) t.add({i, j, k}, -10.0 * uniform01(rng));
            }
        }
    }
    return t;
}

void check_solvers(Reporter& rep) {
    Rng rng = make_rng(kCheckSeed, 1, 0, 0, RngPurpose::Test);
    int exact_ok = 0, relaxed_ok = 0;
    double worst_exact = 0.0, worst_relaxed = 0.0;
    constexpr int kTables = 100;
    for (int n = 0; n < kTables; ++n) {
        const AssignmentTable t = random_table(rng);
        const double opt = enumerate_optimum(t);
        const AssociationSolution ex = solve_assignment_exact(t);
        const AssociationSolution rx = solve_assignment_relaxed(t);
        const double de = std::abs(ex.total_cost - opt);
        worst_exact = std::max(worst_exact, de);
        if (ex.feasible && de <= 1e-9 * (1.0 + std::abs(opt)) && check_constraints(t, ex.selected).empty()) ++exact_ok;
        const double dr = std::abs(rx.total_cost - opt) / std::max(std::abs(opt), 1e-12);
        worst_relaxed = std::max(worst_relaxed, dr);
        if (rx.feasible && check_constraints(t, rx.selected).empty() && dr <= 0.05) ++relaxed_ok;
    }
    rep.line("branch and bound equals enumeration", exact_ok == kTables, worst_exact,
             std::to_string(exact_ok) + "/" + std::to_string(kTables));
    rep.line("relaxation within 5% of optimum", relaxed_ok >= 95, worst_relaxed,
             std::to_string(relaxed_ok) + "/" + std::to_string(kTables));
}

void check_bp_exactness(Reporter& rep) {
    Rng rng = make_rng(kCheckSeed, 2, 0, 0, RngPurpose::Test);
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const bool single_track = inst % 2 == 0;
        const int N = single_track ? 1 : uniform_int(rng, 1, 5);
        const int M = single_track ? uniform_int(rng, 1, 5) : 1;
        AssociationMessages msgs;
        for (int t = 0; t < N; ++t) {
            Vector b(M + 1);
            for (int a = 0; a <= M; ++a) b(a) = 0.05 + uniform01(rng);
            msgs.beta.push_back(b);
        }
        for (int i = 0; i < M; ++i) {
            Vector x = Vector::Ones(N + 1);
            x(0) = 1.0 + uniform01(rng);
            msgs.xi.push_back(x);
        }
        iterative_association(msgs, 10);
        // Enumerate every admissible track-oriented association vector.
        std::vector<Vector> pa(static_cast<std::size_t>(N), Vector::Zero(M + 1));
        std::vector<Vector> pb(static_cast<std::size_t>(M), Vector::Zero(N + 1));
        std::vector<int> a(static_cast<std::size_t>(N), 0);
        double total = 0.0;
        std::function<void(int)> rec = [&](int t) {
            if (t == N) {
                std::vector<int> b(static_cast<std::size_t>(M), 0);
                double w = 1.0;
                for (int s = 0; s < N; ++s) {
                    w *= msgs.beta[static_cast<std::size_t>(s)](a[static_cast<std::size_t>(s)]);
                    if (a[static_cast<std::size_t>(s)] > 0) b[static_cast<std::size_t>(a[static_cast<std::size_t>(s)] - 1)] = s + 1;
                }
                for (int i = 0; i < M; ++i) w *= msgs.xi[static_cast<std::size_t>(i)](b[static_cast<std::size_t>(i)]);
                total += w;
                for (int s = 0; s < N; ++s) pa[static_cast<std::size_t>(s)](a[static_cast<std::size_t>(s)]) += w;
                for (int i = 0; i < M; ++i) pb[static_cast<std::size_t>(i)](b[static_cast<std::size_t>(i)]) += w;
                return;
            }
            for (int v = 0; v <= M; ++v) {
                bool taken = false;
                for (int s = 0; s < t; ++s) taken = taken || (v > 0 && a[static_cast<std::size_t>(s)] == v);
                if (taken) continue;
                a[static_cast<std::size_t>(t)] = v;
                rec(t + 1);
            }
            a[static_cast<std::size_t>(t)] = 0;
        };
        rec(0);
        for (int t = 0; t < N; ++t) {
            Vector bp = msgs.beta[static_cast<std::size_t>(t)].cwiseProduct(msgs.kappa[static_cast<std::size_t>(t)]);
            bp /= bp.sum();
            worst = std::max(worst, (bp - pa[static_cast<std::size_t>(t)] / total).cwiseAbs().maxCoeff());
        }
        for (int i = 0; i < M; ++i) {
            Vector bp = msgs.xi[static_cast<std::size_t>(i)].cwiseProduct(msgs.iota[static_cast<std::size_t>(i)]);
            bp /= bp.sum();
            worst = std::max(worst, (bp - pb[static_cast<std::size_t>(i)] / total).cwiseAbs().maxCoeff());
        }
    }
    rep.line("BP marginals equal enumeration on trees", worst <= 1e-12, worst);
}

void check_metrics(Reporter& rep) {
    const bool table = comm_bytes(PayloadKind::Raw, 2, 4, 100) == 10400 &&
                       comm_bytes(PayloadKind::InfoFilter, 2, 4, 100) == 22400 &&
                       comm_bytes(PayloadKind::Type1, 2, 4, 100) == 8000 &&
                       comm_bytes(PayloadKind::Type2, 2, 4, 100) == 4000;
    rep.line("communication bytes m=2 n=4 N=100", table, 0.0, "10400/22400/8000/4000");

    Rng rng = make_rng(kCheckSeed, 3, 0, 0, RngPurpose::Test);
    auto random_set = [&]() {
        std::vector<Vector> s(static_cast<std::size_t>(uniform_int(rng, 0, 6)));
        for (auto& v : s) v = random_matrix(rng, 2, 1).col(0) * 40.0;
        return s;
    };
    double asym = 0.0, tri = 0.0, self = 0.0;
    for (int k = 0; k < 500; ++k) {
        const auto X = random_set();
        const auto Y = random_set();
        const auto Z = random_set();
        const double xy = ospa(X, Y);
        asym = std::max(asym, std::abs(xy - ospa(Y, X)));
        tri = std::max(tri, xy - ospa(X, Z) - ospa(Z, Y));
        self = std::max(self, ospa(X, X));
    }
    rep.line("OSPA symmetry", asym == 0.0, asym);
    rep.line("OSPA triangle inequality", tri <= 1e-9, std::max(tri, 0.0));
    rep.line("OSPA identity", self == 0.0, self);
}

}  // namespace

bool run_checks(const std::string& suite, std::ostream& out) {
    Reporter rep{out};
    bool known = false;
    if (suite == "lemmas" || suite == "all") {
        check_lemmas(rep);
        known = true;
    }
    if (suite == "solvers" || suite == "all") {
        check_solvers(rep);
        known = true;
    }
    if (suite == "bp-exactness" || suite == "all") {
        check_bp_exactness(rep);
        known = true;
    }
    if (suite == "metrics" || suite == "all") {
        check_metrics(rep);
        known = true;
    }
    if (!known) {
        throw ConfigurationError("unknown check suite '" + suite +
                                 "' (expected lemmas, solvers, bp-exactness, metrics or all)");
    }
    return rep.all_ok;
}

}  // namespace trackfuse
