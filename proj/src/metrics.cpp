#include "trackfuse/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "trackfuse/assignment.hpp"
#include "trackfuse/errors.hpp"

namespace trackfuse {

void OspaParams::validate() const {
    if (!(c > 0.0)) throw ConfigurationError("ospa: cutoff must be positive");
    if (!(p >= 1.0)) throw ConfigurationError("ospa: order must be at least 1");
    if (w < 1) throw ConfigurationError("ospa: window must be at least 1");
}

namespace {

bool lex_points_less(std::vector<Vector> a, std::vector<Vector> b) {
    auto less = [](const Vector& u, const Vector& v) {
        return std::lexicographical_compare(u.data(), u.data() + u.size(), v.data(), v.data() + v.size());
    };
    std::sort(a.begin(), a.end(), less);
    std::sort(b.begin(), b.end(), less);
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), less);
}

// OSPA over abstract elements given a pairwise cut-off distance matrix (rows <= cols).
double ospa_from_matrix(const Matrix& d, std::size_t rows, std::size_t cols, const OspaParams& params) {
    if (cols == 0) return 0.0;
    const double cp = std::pow(params.c, params.p);
    double total = cp * static_cast<double>(cols - rows);
    if (rows > 0) {
        Matrix cost(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                cost(i, j) = std::pow(std::min(d(i, j), params.c), params.p);
            }
        }
        const std::vector<int> match = solve_linear_assignment(cost);
        for (std::size_t i = 0; i < rows; ++i) {
            total += cost(i, match[i]);
        }
    }
    return std::pow(total / static_cast<double>(cols), 1.0 / params.p);
}

}  // namespace

double ospa(const std::vector<Vector>& X, const std::vector<Vector>& Y, const OspaParams& params) {
    params.validate();
    // Orient canonically so that ospa(X, Y) and ospa(Y, X) run the same arithmetic.
    bool swap = X.size() > Y.size();
    if (X.size() == Y.size()) {
        swap = lex_points_less(Y, X);
    }
    const std::vector<Vector>& A = swap ? Y : X;
    const std::vector<Vector>& B = swap ? X : Y;
    Matrix d(A.size(), B.size());
    for (std::size_t i = 0; i < A.size(); ++i) {
        for (std::size_t j = 0; j < B.size(); ++j) {
            d(i, j) = (A[i] - B[j]).norm();
        }
    }
    return ospa_from_matrix(d, A.size(), B.size(), params);
}

double ospa2(const std::vector<Trajectory>& X, const std::vector<Trajectory>& Y, int k, const OspaParams& params) {
    params.validate();
    const int k0 = k - params.w + 1;
    auto in_window = [&](const Trajectory& t) {
        auto it = t.states.lower_bound(k0);
        return it != t.states.end() && it->first <= k;
    };
    std::vector<const Trajectory*> a, b;
    for (const auto& t : X) if (in_window(t)) a.push_back(&t);
    for (const auto& t : Y) if (in_window(t)) b.push_back(&t);
    auto label_less = [](const std::vector<const Trajectory*>& u, const std::vector<const Trajectory*>& v) {
        // Canonical orientation for equal sizes: compare the first differing state.
        for (std::size_t i = 0; i < u.size() && i < v.size(); ++i) {
            if (u[i]->states.size() != v[i]->states.size()) return u[i]->states.size() < v[i]->states.size();
            auto iu = u[i]->states.begin();
            auto iv = v[i]->states.begin();
            for (; iu != u[i]->states.end(); ++iu, ++iv) {
                if (iu->first != iv->first) return iu->first < iv->first;
                const Vector& pu = iu->second;
                const Vector& pv = iv->second;
                for (Eigen::Index j = 0; j < pu.size() && j < pv.size(); ++j) {
                    if (pu(j) != pv(j)) return pu(j) < pv(j);
                }
            }
        }
        return false;
    };
    bool swap = a.size() > b.size();
    if (a.size() == b.size()) swap = label_less(b, a);
    const auto& A = swap ? b : a;
    const auto& B = swap ? a : b;

    const double cp = std::pow(params.c, params.p);
    Matrix d(A.size(), B.size());
    for (std::size_t i = 0; i < A.size(); ++i) {
        for (std::size_t j = 0; j < B.size(); ++j) {
            double sum = 0.0;
            int count = 0;
            for (int t = k0; t <= k; ++t) {
                auto ia = A[i]->states.find(t);
                auto ib = B[j]->states.find(t);
                const bool ea = ia != A[i]->states.end();
                const bool eb = ib != B[j]->states.end();
                if (!ea && !eb) continue;
                ++count;
                if (ea && eb) {
                    sum += std::pow(std::min((ia->second - ib->second).norm(), params.c), params.p);
                } else {
                    sum += cp;
                }
            }
            d(i, j) = count > 0 ? std::pow(sum / count, 1.0 / params.p) : 0.0;
        }
    }
    return ospa_from_matrix(d, A.size(), B.size(), params);
}

std::string to_string(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::Raw: return "raw";
        case PayloadKind::InfoFilter: return "info_filter";
        case PayloadKind::Type1: return "type1";
        case PayloadKind::Type2: return "type2";
    }
    return "unknown";
}

PayloadKind parse_payload(const std::string& name) {
    if (name == "raw") return PayloadKind::Raw;
    if (name == "info_filter" || name == "info") return PayloadKind::InfoFilter;
    if (name == "type1") return PayloadKind::Type1;
    if (name == "type2") return PayloadKind::Type2;
    throw InvalidInput("unknown payload kind '" + name + "'");
}

std::uint64_t comm_bytes(PayloadKind kind, int m, int n, std::uint64_t n_max) {
    if (m < 1 || n < 1) {
        throw InvalidInput("comm_bytes: dimensions must be positive");
    }
    const std::uint64_t M = static_cast<std::uint64_t>(m);
    const std::uint64_t N = static_cast<std::uint64_t>(n);
    std::uint64_t scalars = 0;
    switch (kind) {
        case PayloadKind::Raw: scalars = M + M * N + M * (M + 1) / 2; break;
        case PayloadKind::InfoFilter: scalars = 2 * N + N * (N + 1); break;
        case PayloadKind::Type1: scalars = M + M * N; break;
        case PayloadKind::Type2: scalars = M + M * (M + 1) / 2; break;
        default: throw InvalidInput("comm_bytes: unknown payload kind");
    }
    return kBytesPerScalar * scalars * n_max;
}

std::uint64_t CommLedger::total(PayloadKind kind) const {
    std::uint64_t sum = 0;
    for (const auto& [key, bytes] : entries) {
        if (std::get<2>(key) == kind) sum += bytes;
    }
    return sum;
}

std::uint64_t CommLedger::scan_total(int scan, PayloadKind kind) const {
    std::uint64_t sum = 0;
    for (const auto& [key, bytes] : entries) {
        if (std::get<0>(key) == scan && std::get<2>(key) == kind) sum += bytes;
    }
    return sum;
}

CommLedger& ledger_record(CommLedger& ledger, int scan, int sensor, std::uint64_t n_tracks_sent, PayloadKind kind,
                          int m, int n) {
    ledger.entries[{scan, sensor, kind}] += comm_bytes(kind, m, n, n_tracks_sent);
    return ledger;
}

}  // namespace trackfuse
