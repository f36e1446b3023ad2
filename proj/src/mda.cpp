#include "trackfuse/mda.hpp"

#include <algorithm>
#include <cmath>

#include "trackfuse/errors.hpp"

namespace trackfuse {

namespace {

void check_arity(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx) {
    if (batches.size() != idx.size()) {
        throw ConfigurationError("hypothesis arity does not match the number of sensors");
    }
    for (std::size_t l = 0; l < idx.size(); ++l) {
        if (idx[l] < 0 || static_cast<std::size_t>(idx[l]) > batches[l]->size()) {
            throw ConfigurationError("hypothesis index out of range for sensor " + std::to_string(l));
        }
    }
}

double missed_term(const MeasurementBatch& b) {
    return std::log1p(-b.detection_prob);
}

double detected_prefix(const MeasurementBatch& b) {
    return std::log(b.detection_prob) - std::log(b.clutter_rate) - b.log_clutter_density;
}

// Per (track, sensor) quantities reused across all tuples of that track.
struct SensorPrediction {
    Vector z_hat;
    Matrix S;
    PsdSpectrum spec;
};

SensorPrediction predict_measurement(const GaussianEstimate& pred, const MeasurementBatch& b) {
    SensorPrediction out;
    out.z_hat = b.H * pred.mean;
    out.S = symmetrize(b.H * pred.cov * b.H.transpose() + b.R);
    out.spec = psd_spectrum(out.S);
    return out;
}

double detected_term(const MeasurementBatch& b, const SensorPrediction& sp, int i) {
    return detected_prefix(b) + batch_log_likelihood(b, b.z[static_cast<std::size_t>(i - 1)], sp.z_hat, sp.S);
}

HypothesisCost make_cost(std::vector<int> indices, std::vector<int> u, double log_score) {
    HypothesisCost h;
    h.indices = std::move(indices);
    h.u = std::move(u);
    h.log_score = log_score;
    h.cost = -log_score;
    return h;
}

std::vector<int> indicators(const std::vector<int>& idx) {
    std::vector<int> u(idx.size());
    for (std::size_t l = 0; l < idx.size(); ++l) {
        u[l] = idx[l] != 0 ? 1 : 0;
    }
    return u;
}

void add_clutter_singletons(MdaProblem& problem, const std::vector<const MeasurementBatch*>& batches,
                            const std::vector<std::vector<char>>* used, bool with_track_slot) {
    const std::size_t L = batches.size();
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t i = 1; i <= batches[l]->size(); ++i) {
            if (used != nullptr && (*used)[l][i - 1]) continue;
            std::vector<int> idx(L, 0);
            idx[l] = static_cast<int>(i);
            HypothesisCost h = score_clutter(idx);
            if (with_track_slot) {
                h.indices.insert(h.indices.begin(), 0);
            }
            problem.hypotheses.push_back(std::move(h));
        }
    }
}

}  // namespace

HypothesisCost score_with_prior(const GaussianEstimate& pred, const std::vector<const MeasurementBatch*>& batches,
                                const std::vector<int>& idx) {
    check_arity(batches, idx);
    double log_score = 0.0;
    for (std::size_t l = 0; l < batches.size(); ++l) {
        const MeasurementBatch& b = *batches[l];
        if (idx[l] == 0) {
            log_score += missed_term(b);
        } else {
            log_score += detected_term(b, predict_measurement(pred, b), idx[l]);
        }
    }
    return make_cost(idx, indicators(idx), log_score);
}

HypothesisCost score_clutter(const std::vector<int>& idx) {
    return make_cost(idx, indicators(idx), 0.0);
}

MleResult mle_fit(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx) {
    check_arity(batches, idx);
    Eigen::Index n = 0;
    for (const auto* b : batches) {
        n = std::max(n, b->H.cols());
    }
    MleResult out;
    out.info = Matrix::Zero(n, n);
    out.info_vec = Vector::Zero(n);
    std::vector<Matrix> rpinv(batches.size());
    for (std::size_t l = 0; l < batches.size(); ++l) {
        if (idx[l] == 0) continue;
        const MeasurementBatch& b = *batches[l];
        const PsdSpectrum spec = psd_spectrum(b.R);
        rpinv[l] = spec.pinv;
        out.meas_rank += spec.rank;
        const Matrix HtRp = b.H.transpose() * spec.pinv;
        out.info += HtRp * b.H;
        out.info_vec += HtRp * b.z[static_cast<std::size_t>(idx[l] - 1)];
    }
    out.info = symmetrize(out.info);
    if (out.meas_rank == 0) {
        out.x = Vector::Zero(n);
        return out;
    }
    const PsdSpectrum ispec = psd_spectrum(out.info);
    out.info_rank = ispec.rank;
    out.x = ispec.pinv * out.info_vec;
    for (std::size_t l = 0; l < batches.size(); ++l) {
        if (idx[l] == 0) continue;
        const MeasurementBatch& b = *batches[l];
        const Vector r = b.z[static_cast<std::size_t>(idx[l] - 1)] - b.H * out.x;
        out.residual += r.dot(rpinv[l] * r);
    }
    return out;
}

Vector mle_state(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx) {
    const MleResult fit = mle_fit(batches, idx);
    if (fit.meas_rank == 0 || fit.info_rank < fit.info.rows()) {
        throw UnobservableError("mle_state: stacked information matrix is singular (rank " +
                                std::to_string(fit.info_rank) + " of " + std::to_string(fit.info.rows()) + ")");
    }
    return fit.info.ldlt().solve(fit.info_vec);
}

HypothesisCost score_without_prior(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx) {
    check_arity(batches, idx);
    const MleResult fit = mle_fit(batches, idx);
    if (fit.meas_rank == 0 || fit.residual_dof() <= 0) {
        return make_cost(idx, indicators(idx), -kInf);
    }
    double log_score = 0.0;
    for (std::size_t l = 0; l < batches.size(); ++l) {
        const MeasurementBatch& b = *batches[l];
        if (idx[l] == 0) {
            log_score += missed_term(b);
        } else {
            log_score += detected_prefix(b) +
                         batch_log_likelihood(b, b.z[static_cast<std::size_t>(idx[l] - 1)], b.H * fit.x, b.R);
        }
    }
    return make_cost(idx, indicators(idx), log_score);
}

MdaProblem build_mda_problem(const std::vector<GaussianEstimate>& tracks,
                             const std::vector<const MeasurementBatch*>& batches, const MdaConfig& config) {
    const std::size_t L = batches.size();
    MdaProblem problem;
    problem.table.first_mandatory = true;
    problem.table.dim_sizes.push_back(static_cast<int>(tracks.size()));
    for (const auto* b : batches) {
        problem.table.dim_sizes.push_back(static_cast<int>(b->size()));
    }

    for (std::size_t tau = 0; tau < tracks.size(); ++tau) {
        // Gated candidates and their score terms per sensor; slot 0 is "none".
        std::vector<std::vector<int>> gated(L);
        std::vector<std::vector<double>> terms(L);
        for (std::size_t l = 0; l < L; ++l) {
            const MeasurementBatch& b = *batches[l];
            gated[l].push_back(0);
            terms[l].push_back(missed_term(b));
            if (b.size() == 0) continue;
            const SensorPrediction sp = predict_measurement(tracks[tau], b);
            const double gate = chi2_quantile(sp.spec.rank, config.gate_prob);
            for (std::size_t i = 1; i <= b.size(); ++i) {
                const Vector d = b.z[i - 1] - sp.z_hat;
                if (d.dot(sp.spec.pinv * d) <= gate) {
                    gated[l].push_back(static_cast<int>(i));
                    terms[l].push_back(detected_term(b, sp, static_cast<int>(i)));
                }
            }
        }
        std::size_t count = 1;
        for (std::size_t l = 0; l < L; ++l) count *= gated[l].size();
        if (problem.table.size() + count > config.max_tuples) {
            throw ResourceError("build_mda_problem: cost table exceeds cap", problem.table.size() + count);
        }
        std::vector<std::size_t> pos(L, 0);
        for (std::size_t k = 0; k < count; ++k) {
            std::vector<int> idx(L);
            double log_score = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                idx[l] = gated[l][pos[l]];
                log_score += terms[l][pos[l]];
            }
            std::vector<int> full;
            full.reserve(L + 1);
            full.push_back(static_cast<int>(tau) + 1);
            full.insert(full.end(), idx.begin(), idx.end());
            HypothesisCost h = make_cost(full, indicators(idx), log_score);
            problem.table.add(h.indices, h.cost);
            problem.hypotheses.push_back(std::move(h));
            for (std::size_t l = L; l-- > 0;) {
                if (++pos[l] < gated[l].size()) break;
                pos[l] = 0;
            }
        }
    }
    problem.solver_tuples = problem.table.size();
    add_clutter_singletons(problem, batches, nullptr, true);
    return problem;
}

MdaProblem build_init_problem(const std::vector<const MeasurementBatch*>& batches,
                              const std::vector<std::vector<char>>& used, const MdaConfig& config) {
    const std::size_t L = batches.size();
    MdaProblem problem;
    problem.table.first_mandatory = false;
    for (const auto* b : batches) {
        problem.table.dim_sizes.push_back(static_cast<int>(b->size()));
    }
    std::vector<int> idx(L, 0);
    std::size_t visited = 0;
    // Depth-first over sensors; a partial tuple is extended only while its own
    // fit residual stays inside the gate.
    auto recurse = [&](auto&& self, std::size_t l, int count) -> void {
        if (++visited > config.max_tuples * 4) {
            throw ResourceError("build_init_problem: enumeration exceeds cap", visited);
        }
        if (count >= 2) {
            const MleResult fit = mle_fit(batches, idx);
            const int dof = fit.residual_dof();
            if (dof > 0 && fit.residual > chi2_quantile(dof, config.gate_prob)) return;
        }
        if (l == L) {
            if (count == 0) return;
            HypothesisCost h = score_without_prior(batches, idx);
            if (!std::isfinite(h.cost)) return;
            if (problem.table.size() + 1 > config.max_tuples) {
                throw ResourceError("build_init_problem: cost table exceeds cap", problem.table.size() + 1);
            }
            problem.table.add(h.indices, h.cost);
            problem.hypotheses.push_back(std::move(h));
            return;
        }
        idx[l] = 0;
        self(self, l + 1, count);
        for (std::size_t i = 1; i <= batches[l]->size(); ++i) {
            if (used[l][i - 1]) continue;
            idx[l] = static_cast<int>(i);
            self(self, l + 1, count + 1);
        }
        idx[l] = 0;
    };
    recurse(recurse, 0, 0);
    problem.solver_tuples = problem.table.size();
    add_clutter_singletons(problem, batches, &used, false);
    return problem;
}

AssociationSolution solve_mda(const MdaProblem& problem, const MdaConfig& config) {
    if (config.solver == SolverKind::Exact) {
        ExactSolverOptions opts;
        opts.max_tuples = config.max_tuples;
        return solve_assignment_exact(problem.table, opts);
    }
    return solve_assignment_relaxed(problem.table);
}

GaussianEstimate initialize_track(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx,
                                  double unobserved_prior_var) {
    const MleResult fit = mle_fit(batches, idx);
    const Eigen::Index n = fit.info.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(fit.info);
    const double cutoff = kRankTolerance * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
    Matrix prior = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (eig.eigenvalues()(k) <= cutoff) {
            prior += eig.eigenvectors().col(k) * eig.eigenvectors().col(k).transpose() / unobserved_prior_var;
        }
    }
    const Matrix Y = symmetrize(fit.info + prior);
    Eigen::LDLT<Matrix> ldlt(Y);
    GaussianEstimate est;
    est.cov = symmetrize(ldlt.solve(Matrix::Identity(n, n)));
    est.mean = ldlt.solve(fit.info_vec);
    return est;
}

MdaState mda_pipeline_step(const MdaState& state, const std::vector<MeasurementBatch>& batches,
                           const MdaConfig& config, MdaStepTrace* trace) {
    std::vector<const MeasurementBatch*> ptrs;
    for (const auto& b : batches) ptrs.push_back(&b);
    const std::size_t L = batches.size();

    MdaState next;
    next.next_label = state.next_label;
    std::vector<GaussianEstimate> predicted;
    for (const auto& t : state.tracks) {
        predicted.push_back(predict(t.est, config.motion));
    }

    std::vector<std::vector<char>> used(L);
    for (std::size_t l = 0; l < L; ++l) used[l].assign(batches[l].size(), 0);

    const MdaProblem maint = build_mda_problem(predicted, ptrs, config);
    AssociationSolution msol;
    if (!state.tracks.empty()) {
        msol = solve_mda(maint, config);
        if (!msol.feasible) {
            throw NumericalError("mda_pipeline_step: maintenance problem has no feasible assignment");
        }
    } else {
        msol.feasible = true;
        msol.total_cost = 0.0;
    }
    std::vector<std::vector<int>> chosen(state.tracks.size());
    for (const auto& tup : msol.assignments) {
        chosen[static_cast<std::size_t>(tup[0] - 1)] = std::vector<int>(tup.begin() + 1, tup.end());
    }
    int deleted = 0;
    for (std::size_t tau = 0; tau < state.tracks.size(); ++tau) {
        FusedTrack tr = state.tracks[tau];
        tr.est = predicted[tau];
        bool detected = false;
        for (std::size_t l = 0; l < L; ++l) {
            const int i = chosen[tau].empty() ? 0 : chosen[tau][l];
            if (i == 0) continue;
            const MeasurementBatch& b = batches[l];
            tr.est = update_transformed(tr.est, b.z[static_cast<std::size_t>(i - 1)], b.H, b.R);
            used[l][static_cast<std::size_t>(i - 1)] = 1;
            detected = true;
        }
        if (detected) {
            ++tr.hits;
            tr.misses = 0;
        } else {
            ++tr.misses;
        }
        if (tr.hits >= config.confirm_hits) tr.confirmed = true;
        if (tr.misses >= config.delete_misses) {
            ++deleted;
            continue;
        }
        next.tracks.push_back(std::move(tr));
    }

    const MdaProblem init = build_init_problem(ptrs, used, config);
    AssociationSolution isol = solve_mda(init, config);
    int born = 0;
    if (isol.feasible) {
        for (const auto& tup : isol.assignments) {
            FusedTrack tr;
            tr.label = next.next_label++;
            tr.est = initialize_track(ptrs, tup, config.unobserved_prior_var);
            tr.est.timestamp = predicted.empty() ? 0 : predicted.front().timestamp;
            tr.hits = 1;
            tr.confirmed = tr.hits >= config.confirm_hits;
            next.tracks.push_back(std::move(tr));
            ++born;
        }
    }
    if (trace != nullptr) {
        trace->maintenance = msol;
        trace->initialization = isol;
        trace->maintenance_tuples = maint.table.size();
        trace->init_tuples = init.table.size();
        trace->born = born;
        trace->deleted = deleted;
    }
    return next;
}

}  // namespace trackfuse
