#include "trackfuse/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trackfuse/errors.hpp"

namespace trackfuse {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// Values below this are flushed to zero so that both encodings agree on which
// entries vanish instead of drifting through the subnormal range.
constexpr double kFlush = 1e-250;
constexpr double kLogFlush = -575.0;

double flush(double v) {
    return v < kFlush ? 0.0 : v;
}

double exp_flush(double log_v) {
    return log_v < kLogFlush ? 0.0 : flush(std::exp(log_v));
}

// sum_{j != i} t_j through prefix and suffix sums, avoiding cancellation.
Vector sums_excluding(const Vector& t) {
    const Eigen::Index n = t.size();
    Vector prefix(n + 1), suffix(n + 1);
    prefix(0) = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + t(i);
    suffix(n) = 0.0;
    for (Eigen::Index i = n; i > 0; --i) suffix(i - 1) = suffix(i) + t(i - 1);
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = prefix(i) + suffix(i + 1);
    return out;
}

double safe_ratio(double num, double den) {
    if (num == 0.0) return 0.0;
    if (!(den > 0.0)) throw DegenerateError("iterative_association: message lost all its mass");
    return num / den;
}

Vector max_normalized(const Vector& v) {
    const double m = v.maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) {
        throw DegenerateError("iterative_association: all-zero or non-finite message");
    }
    Vector out = v / m;
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = flush(out(i));
    return out;
}

}  // namespace

void BpConfig::validate() const {
    if (iterations < 1) throw ConfigurationError("bp: iterations must be at least 1");
    if (num_particles < 1) throw ConfigurationError("bp: particles must be at least 1");
    if (!(p_pr > 0.0 && p_pr < p_th && p_th < 1.0)) throw ConfigurationError("bp: need 0 < p_pr < p_th < 1");
    if (n_pr < 0) throw ConfigurationError("bp: n_pr must be nonnegative");
    if (!(birth_rate > 0.0)) throw ConfigurationError("bp: birth_rate must be positive");
    if (!(survival_prob > 0.0 && survival_prob <= 1.0)) throw ConfigurationError("bp: survival_prob must lie in (0, 1]");
    if (!(birth_velocity_std > 0.0)) throw ConfigurationError("bp: birth_velocity_std must be positive");
    if (!(birth_inflation > 0.0)) throw ConfigurationError("bp: birth_inflation must be positive");
    if (!(region_xmin < region_xmax && region_ymin < region_ymax)) throw ConfigurationError("bp: empty region");
    motion.validate();
    if (motion.n() != 4) throw ConfigurationError("bp: motion model must have a 4-dimensional state");
}

Vector ParticleBelief::estimate() const {
    const double total = weights.sum();
    if (!(total > 0.0)) return particles.rowwise().mean();
    return particles * weights / total;
}

void bp_predict(std::vector<ParticleBelief>& beliefs, const MotionModel& motion, double survival_prob, Rng& rng) {
    const Matrix L = psd_factor(motion.Q);
    const Eigen::Index n = motion.n();
    for (auto& b : beliefs) {
        const Eigen::Index np = b.particles.cols();
        Matrix noise(n, np);
        for (Eigen::Index c = 0; c < np; ++c) {
            for (Eigen::Index r = 0; r < n; ++r) noise(r, c) = standard_normal(rng);
        }
        b.particles = motion.F * b.particles + L * noise;
        b.weights *= survival_prob;
        b.r_prob *= survival_prob;
    }
}

double detection_probability(const MeasurementBatch& batch, const Eigen::Ref<const Vector>& x) {
    return batch.fov.contains(x(0), x(1)) ? batch.detection_prob : 0.0;
}

BirthSample sample_birth(const MeasurementBatch& batch, const BatchLikelihood& lik, std::size_t i,
                         const BpConfig& config, Rng& rng) {
    const Matrix Hp = batch.H.leftCols(2);
    const Matrix Rp = pseudo_inverse(batch.R);
    const Matrix info = symmetrize(Hp.transpose() * Rp * Hp);
    if (numerical_rank(info, 1e-10) < 2) {
        throw DegenerateError("sample_birth: measurement does not determine a position");
    }
    const Matrix cov = symmetrize(info.inverse());
    const Vector mean = cov * (Hp.transpose() * Rp * batch.z[i]);
    Eigen::LLT<Matrix> llt(config.birth_inflation * cov);
    if (llt.info() != Eigen::Success) throw DegenerateError("sample_birth: proposal covariance not positive definite");
    const Matrix L = llt.matrixL();
    const double half_log_det = L.diagonal().array().log().sum();

    const int np = config.num_particles;
    BirthSample out;
    out.particles.resize(4, np);
    Matrix normals(2, np);
    for (int c = 0; c < np; ++c) {
        Vector u(4);
        for (int r = 0; r < 4; ++r) u(r) = standard_normal(rng);
        out.particles.block(0, c, 2, 1) = mean + L * u.head(2);
        out.particles.block(2, c, 2, 1) = config.birth_velocity_std * u.tail(2);
        normals.col(c) = u.head(2);
    }
    Vector ll(np);
    lik.log_likelihood_all(i, out.particles, ll);
    const ClutterModel clutter = batch.clutter();
    // Velocity parts of f_n and of the proposal are the same Gaussian and cancel.
    const double log_const = std::log(config.birth_rate) - std::log(config.region_area()) + kLog2Pi + half_log_det -
                             std::log(clutter.rate) - batch.log_clutter_density;
    out.log_weights.resize(np);
    out.weights.resize(np);
    for (int c = 0; c < np; ++c) {
        const double px = out.particles(0, c);
        const double py = out.particles(1, c);
        const bool inside =
            px >= config.region_xmin && px <= config.region_xmax && py >= config.region_ymin && py <= config.region_ymax;
        if (!inside) {
            out.log_weights(c) = -std::numeric_limits<double>::infinity();
            out.weights(c) = 0.0;
            continue;
        }
        out.log_weights(c) = log_const + 0.5 * normals.col(c).squaredNorm() + ll(c);
        out.weights(c) = exp_flush(out.log_weights(c));
    }
    out.integral = out.weights.sum() / np;
    return out;
}

SensorEvaluation measurement_evaluation(const std::vector<ParticleBelief>& beliefs, const MeasurementBatch& batch,
                                        const BpConfig& config, Rng& rng) {
    const std::size_t N = beliefs.size();
    const std::size_t M = batch.size();
    const BatchLikelihood lik(batch);
    const double log_clutter = std::log(batch.clutter_rate) + batch.log_clutter_density;

    SensorEvaluation out;
    out.tracks.resize(N);
    out.msgs.beta.resize(N);
    for (std::size_t t = 0; t < N; ++t) {
        const ParticleBelief& b = beliefs[t];
        const Eigen::Index np = b.particles.cols();
        if (np == 0) throw InvalidInput("measurement_evaluation: belief without particles");
        Vector pd(np);
        for (Eigen::Index c = 0; c < np; ++c) pd(c) = detection_probability(batch, b.particles.col(c));
        Matrix& q = out.tracks[t].q;
        q.resize(np, static_cast<Eigen::Index>(M + 1));
        q.col(0) = (1.0 - pd.array()).matrix();
        Vector ll(np);
        for (std::size_t j = 0; j < M; ++j) {
            lik.log_likelihood_all(j, b.particles, ll);
            for (Eigen::Index c = 0; c < np; ++c) {
                q(c, static_cast<Eigen::Index>(j + 1)) =
                    pd(c) > 0.0 ? exp_flush(std::log(pd(c)) + ll(c) - log_clutter) : 0.0;
            }
        }
        Vector beta = q.transpose() * b.weights;
        beta(0) += 1.0 - b.r_prob;
        for (Eigen::Index a = 0; a < beta.size(); ++a) beta(a) = flush(beta(a));
        out.msgs.beta[t] = std::move(beta);
    }
    out.births.reserve(M);
    out.msgs.xi.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
        out.births.push_back(sample_birth(batch, lik, j, config, rng));
        Vector xi = Vector::Ones(static_cast<Eigen::Index>(N + 1));
        xi(0) = 1.0 + out.births.back().integral;
        out.msgs.xi[j] = std::move(xi);
    }
    return out;
}

void iterative_association(AssociationMessages& msgs, int iterations) {
    if (iterations < 1) throw ConfigurationError("iterative_association: need at least one iteration");
    const std::size_t N = msgs.beta.size();
    const std::size_t M = msgs.xi.size();
    for (const auto& b : msgs.beta) {
        if (static_cast<std::size_t>(b.size()) != M + 1) throw InvalidInput("iterative_association: beta size");
        if (!(b.array() >= 0.0).all() || !b.allFinite()) throw InvalidInput("iterative_association: invalid beta");
    }
    for (const auto& x : msgs.xi) {
        if (static_cast<std::size_t>(x.size()) != N + 1) throw InvalidInput("iterative_association: xi size");
        if (!(x.array() >= 0.0).all() || !x.allFinite()) throw InvalidInput("iterative_association: invalid xi");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(N);
    const Eigen::Index m = static_cast<Eigen::Index>(M);

    // Two-valued messages kept as ratios of the "matching" entry to the other one:
    // rho(t, i) for phi_{t->i}, mu(t, i) for nu_{i->t}.
    Matrix mu = Matrix::Ones(n, m);
    Matrix rho(n, m);
    auto update_rho = [&]() {
        for (Eigen::Index t = 0; t < n; ++t) {
            const Vector& beta = msgs.beta[static_cast<std::size_t>(t)];
            Vector terms(m);
            for (Eigen::Index i = 0; i < m; ++i) terms(i) = beta(i + 1) * mu(t, i);
            const Vector rest = sums_excluding(terms);
            for (Eigen::Index i = 0; i < m; ++i) rho(t, i) = safe_ratio(beta(i + 1), beta(0) + rest(i));
        }
    };
    auto update_mu = [&]() {
        for (Eigen::Index i = 0; i < m; ++i) {
            const Vector& xi = msgs.xi[static_cast<std::size_t>(i)];
            Vector terms(n);
            for (Eigen::Index t = 0; t < n; ++t) terms(t) = xi(t + 1) * rho(t, i);
            const Vector rest = sums_excluding(terms);
            for (Eigen::Index t = 0; t < n; ++t) mu(t, i) = safe_ratio(xi(t + 1), xi(0) + rest(t));
        }
    };
    update_rho();  // zeta^0, used as phi^0
    for (int p = 1; p <= iterations; ++p) {
        update_mu();
        update_rho();
    }

    msgs.kappa.assign(N, Vector());
    for (Eigen::Index t = 0; t < n; ++t) {
        Vector k(m + 1);
        k(0) = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) k(i + 1) = mu(t, i);
        msgs.kappa[static_cast<std::size_t>(t)] = max_normalized(k);
    }
    msgs.iota.assign(M, Vector());
    for (Eigen::Index i = 0; i < m; ++i) {
        Vector v(n + 1);
        v(0) = 1.0;
        for (Eigen::Index t = 0; t < n; ++t) v(t + 1) = rho(t, i);
        msgs.iota[static_cast<std::size_t>(i)] = max_normalized(v);
    }
}

UpdateTerms measurement_update(const SensorEvaluation& eval) {
    UpdateTerms out;
    const auto& msgs = eval.msgs;
    for (std::size_t t = 0; t < eval.tracks.size(); ++t) {
        Vector g = eval.tracks[t].q * msgs.kappa[t];
        for (Eigen::Index c = 0; c < g.size(); ++c) g(c) = flush(g(c));
        out.gamma1.push_back(std::move(g));
        out.gamma0.push_back(msgs.kappa[t](0));
    }
    for (std::size_t i = 0; i < eval.births.size(); ++i) {
        const Vector& iota = msgs.iota[i];
        out.sigma1.push_back(eval.births[i].weights * iota(0));
        out.sigma0.push_back(iota.sum());
    }
    return out;
}

void systematic_resample(ParticleBelief& belief, double u) {
    const Eigen::Index np = belief.particles.cols();
    const double total = belief.weights.sum();
    if (np == 0 || !(total > 0.0)) return;
    Matrix out(belief.particles.rows(), np);
    double cum = belief.weights(0) / total;
    Eigen::Index src = 0;
    for (Eigen::Index k = 0; k < np; ++k) {
        const double pos = (u + static_cast<double>(k)) / static_cast<double>(np);
        while (pos > cum && src + 1 < np) {
            ++src;
            cum += belief.weights(src) / total;
        }
        out.col(k) = belief.particles.col(src);
    }
    belief.particles = std::move(out);
    belief.weights = Vector::Constant(np, belief.r_prob / static_cast<double>(np));
}

std::vector<ParticleBelief> belief_calculation(const std::vector<ParticleBelief>& priors, const SensorEvaluation& eval,
                                               const UpdateTerms& terms, int& next_label, const BpConfig& config,
                                               Rng& rng, std::vector<Vector>* pre_resample_weights) {
    std::vector<ParticleBelief> out;
    out.reserve(priors.size() + eval.births.size());
    const auto& msgs = eval.msgs;
    for (std::size_t t = 0; t < priors.size(); ++t) {
        ParticleBelief b = priors[t];
        Vector w = b.weights.cwiseProduct(terms.gamma1[t]);
        const double c = w.sum() + (1.0 - b.r_prob) * terms.gamma0[t];
        if (!(c > 0.0) || !std::isfinite(c)) throw DegenerateError("belief_calculation: normalization constant not positive");
        w /= c;
        for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = flush(w(k));
        b.weights = std::move(w);
        b.r_prob = std::min(1.0, b.weights.sum());
        const Vector& beta = msgs.beta[t];
        const Vector& kappa = msgs.kappa[t];
        const double assoc = beta.tail(beta.size() - 1).dot(kappa.tail(kappa.size() - 1));
        if (assoc >= 0.5 * beta(0) * kappa(0)) b.detected = true;
        out.push_back(std::move(b));
    }
    for (std::size_t i = 0; i < eval.births.size(); ++i) {
        const BirthSample& s = eval.births[i];
        ParticleBelief b;
        b.label = next_label++;
        b.particles = s.particles;
        const double mass1 = msgs.iota[i](0) * s.integral;
        const double c = mass1 + terms.sigma0[i];
        if (!(c > 0.0) || !std::isfinite(c)) throw DegenerateError("belief_calculation: new-target constant not positive");
        b.r_prob = mass1 / c;
        const double wsum = terms.sigma1[i].sum();
        if (wsum > 0.0) {
            b.weights = terms.sigma1[i] * (b.r_prob / wsum);
            for (Eigen::Index k = 0; k < b.weights.size(); ++k) b.weights(k) = flush(b.weights(k));
        } else {
            b.weights = Vector::Zero(s.particles.cols());
            b.r_prob = 0.0;
        }
        b.detected = true;
        out.push_back(std::move(b));
    }
    if (pre_resample_weights != nullptr) {
        pre_resample_weights->clear();
        for (const auto& b : out) pre_resample_weights->push_back(b.weights);
    }
    for (auto& b : out) {
        const double u = uniform01(rng);
        if (!(b.r_prob > 0.0)) continue;
        const Vector wn = b.weights / b.r_prob;
        const double ess = 1.0 / wn.squaredNorm();
        if (ess < 0.5 * static_cast<double>(config.num_particles)) systematic_resample(b, u);
    }
    return out;
}

std::vector<BpEstimate> declare_estimates(const std::vector<ParticleBelief>& beliefs, const BpConfig& config) {
    std::vector<BpEstimate> out;
    for (const auto& b : beliefs) {
        if (b.r_prob > config.p_th) out.push_back({b.label, b.estimate(), b.r_prob});
    }
    return out;
}

void prune_beliefs(std::vector<ParticleBelief>& beliefs, const BpConfig& config) {
    std::erase_if(beliefs, [&](const ParticleBelief& b) { return b.r_prob < config.p_pr || b.missed_scans > config.n_pr; });
}

void bp_pipeline_step(BpState& state, const std::vector<MeasurementBatch>& batches, const BpConfig& config, Rng& rng,
                      BpStepTrace* trace) {
    bp_predict(state.beliefs, config.motion, config.survival_prob, rng);
    for (auto& b : state.beliefs) b.detected = false;

    std::vector<std::size_t> order(batches.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return batches[a].sensor_id < batches[b].sensor_id; });
    if (trace != nullptr) trace->sensors.clear();

    for (std::size_t idx : order) {
        const MeasurementBatch& batch = batches[idx];
        SensorEvaluation eval = measurement_evaluation(state.beliefs, batch, config, rng);
        iterative_association(eval.msgs, config.iterations);
        const UpdateTerms terms = measurement_update(eval);
        BpSensorTrace* st = nullptr;
        if (trace != nullptr) {
            trace->sensors.emplace_back();
            st = &trace->sensors.back();
            st->sensor_id = batch.sensor_id;
            st->n_before = state.beliefs.size();
            st->n_measurements = batch.size();
        }
        std::vector<ParticleBelief> next = belief_calculation(state.beliefs, eval, terms, state.next_label, config,
                                                              rng, st != nullptr ? &st->weights : nullptr);
        if (next.size() != state.beliefs.size() + batch.size()) {
            throw Error("bp_pipeline_step: belief count bookkeeping violated");
        }
        state.beliefs = std::move(next);
        if (st != nullptr) {
            st->msgs = std::move(eval.msgs);
            for (const auto& b : state.beliefs) {
                st->r_prob.push_back(b.r_prob);
                st->labels.push_back(b.label);
            }
        }
    }
    for (auto& b : state.beliefs) b.missed_scans = b.detected ? 0 : b.missed_scans + 1;
    prune_beliefs(state.beliefs, config);
    ++state.scan;
}

namespace {

double rel_diff(double a, double b) {
    if (a == b) return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

double vec_diff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < a[i].size(); ++k) worst = std::max(worst, rel_diff(a[i](k), b[i](k)));
    }
    return worst;
}

}  // namespace

double trace_difference(const BpStepTrace& a, const BpStepTrace& b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (a.sensors.size() != b.sensors.size()) return inf;
    double worst = 0.0;
    for (std::size_t s = 0; s < a.sensors.size(); ++s) {
        const auto& x = a.sensors[s];
        const auto& y = b.sensors[s];
        if (x.sensor_id != y.sensor_id || x.n_before != y.n_before || x.n_measurements != y.n_measurements ||
            x.labels != y.labels || x.r_prob.size() != y.r_prob.size()) {
            return inf;
        }
        worst = std::max({worst, vec_diff(x.msgs.beta, y.msgs.beta), vec_diff(x.msgs.xi, y.msgs.xi),
                          vec_diff(x.msgs.kappa, y.msgs.kappa), vec_diff(x.msgs.iota, y.msgs.iota),
                          vec_diff(x.weights, y.weights)});
        for (std::size_t i = 0; i < x.r_prob.size(); ++i) worst = std::max(worst, rel_diff(x.r_prob[i], y.r_prob[i]));
    }
    return worst;
}

}  // namespace trackfuse
