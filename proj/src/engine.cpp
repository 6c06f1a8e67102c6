#include "ranksched/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "ranksched/oracle.hpp"
#include "ranksched/rng.hpp"

namespace ranksched {

DiscreteDist Workload::overall() const {
    std::vector<DiscreteDist> ds;
    std::vector<double> ws;
    for (const auto& c : components) {
        ds.push_back(c.dist);
        ws.push_back(c.prob);
    }
    return mixture(ds, ws);
}

void validate(const Workload& w) {
    if (w.components.empty()) throw std::invalid_argument("Workload: no components");
    double sum = 0;
    for (const auto& c : w.components) {
        if (!(c.prob > 0)) throw std::invalid_argument("Workload: class probability must be > 0");
        sum += c.prob;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("Workload: class probabilities must sum to 1");
}

double t_quantile_975(int df) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                       2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                       2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                       2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (df < 1) return 0.0;
    if (df <= 30) return table[df - 1];
    return 1.96 + 2.4 / df;  // smooth tail toward the normal quantile
}

namespace {

// Poisson arrival source; draw order per arrival is fixed (interarrival,
// class, size) so the stream is identical for every policy under test.
class ArrivalGen {
  public:
    ArrivalGen(uint64_t seed, int replication, double lambda, const Workload& w)
        : rng_(seed, static_cast<uint64_t>(replication)), lambda_(lambda), w_(&w) {
        double c = 0;
        for (const auto& comp : w.components) {
            c += comp.prob;
            cum_.push_back(c);
        }
        cum_.back() = 1.0;
    }

    Arrival next() {
        t_ += -std::log(rng_.uniform_pos()) / lambda_;
        double uc = rng_.uniform();
        auto k = static_cast<std::size_t>(
            std::upper_bound(cum_.begin(), cum_.end(), uc) - cum_.begin());
        if (k >= cum_.size()) k = cum_.size() - 1;
        double us = rng_.uniform();
        const auto& comp = w_->components[k];
        return {t_, comp.dist.sample(us), comp.cls};
    }

  private:
    Xoshiro256pp rng_;
    double lambda_;
    double t_ = 0;
    const Workload* w_;
    std::vector<double> cum_;
};

struct EngineJob {
    uint64_t id;
    double arrival;
    double size;
    int cls;
    const RankFunction* shared_curve;  // null for size-aware policies
    std::optional<RankFunction> owned;
    int64_t next_ckpt;   // next checkpoint lattice index to pay
    int32_t trace_index;
};

struct WaitKey {
    double value;
    uint64_t min_id;  // FCFS tie order
    bool operator<(const WaitKey& o) const {
        if (value != o.value) return value < o.value;
        return min_id < o.min_id;
    }
};

struct WaitPayload {
    double age;  // frozen age shared by all jobs in the node
    std::vector<uint32_t> jobs;
};

struct RepStats {
    double mean_T = 0;
    double mean_N = 0;
    double util = 0;
    uint64_t measured = 0;
    bool capped = false;
};

constexpr double kSizeEps = 1e-9;

// One replication (or one trace run). Strictly single-threaded.
class Core {
  public:
    Core(const CompiledPolicy& pol, TieMode tie_mode) : pol_(pol), tie_(tie_mode) {}

    RepStats run_poisson(ArrivalGen gen, uint64_t target, double warmup_fraction, bool capped,
                         double horizon) {
        gen_ = std::move(gen);
        target_ = target;
        // A capped (unstable) run may stop early, so measure everything.
        warmup_count_ = capped ? 0 : static_cast<uint64_t>(std::floor(warmup_fraction * target));
        capped_ = capped;
        horizon_ = horizon;
        next_arrival_ = gen_->next();
        have_arrival_ = true;
        loop();
        RepStats st;
        double win_len = end_time_ - win_t0_;
        st.mean_T = nT_ > 0 ? sumT_ / static_cast<double>(nT_) : 0.0;
        st.mean_N = win_len > 0 ? (areaN_ - win_area0_) / win_len : 0.0;
        st.util = win_len > 0 ? (busy_ - win_busy0_) / win_len : 0.0;
        st.measured = nT_;
        st.capped = capped_ && completions_ < target_;
        return st;
    }

    TraceResult run_trace(std::span<const Arrival> arrivals) {
        trace_ = arrivals;
        trace_mode_ = true;
        target_ = arrivals.size();
        warmup_count_ = target_ + 1;  // never snapshots; whole run measured from 0
        completion_times_.assign(arrivals.size(), -1.0);
        if (!trace_.empty()) {
            next_arrival_ = trace_[0];
            trace_pos_ = 1;
            have_arrival_ = true;
        }
        loop();
        TraceResult r;
        r.completion_times = std::move(completion_times_);
        r.busy_time = busy_;
        r.area_jobs = areaN_;
        r.end_time = end_time_;
        return r;
    }

  private:
    enum Event { EV_ARRIVAL, EV_COMPLETE, EV_CKPT, EV_CKPT_FINAL, EV_PREEMPT, EV_OVERHEAD_END };

    const CompiledPolicy& pol_;
    TieMode tie_;

    std::vector<EngineJob> jobs_;
    std::vector<uint32_t> free_;
    std::map<WaitKey, WaitPayload> waiting_;
    std::vector<uint32_t> serving_;  // sorted by (size, id); common age serve_age_
    double serve_age_ = 0;
    uint64_t serve_min_id_ = 0;
    bool in_overhead_ = false;
    double overhead_end_ = 0;

    std::optional<ArrivalGen> gen_;
    std::span<const Arrival> trace_;
    std::size_t trace_pos_ = 0;
    bool trace_mode_ = false;
    Arrival next_arrival_{};
    bool have_arrival_ = false;

    double now_ = 0;
    int64_t live_ = 0;
    double areaN_ = 0, busy_ = 0;
    uint64_t completions_ = 0, target_ = 0, warmup_count_ = 0;
    double sumT_ = 0;
    uint64_t nT_ = 0;
    double win_t0_ = 0, win_area0_ = 0, win_busy0_ = 0;
    double end_time_ = 0;
    bool capped_ = false;
    double horizon_ = kInf;
    uint64_t next_id_ = 0;

    std::vector<double> completion_times_;

    static const RankFunction& curve_of(const EngineJob& j) {
        return j.owned ? *j.owned : *j.shared_curve;
    }

    uint32_t create_job(const Arrival& a, int32_t trace_index) {
        uint32_t idx;
        if (!free_.empty()) {
            idx = free_.back();
            free_.pop_back();
        } else {
            idx = static_cast<uint32_t>(jobs_.size());
            jobs_.emplace_back();
        }
        EngineJob& j = jobs_[idx];
        j.id = next_id_++;
        j.arrival = a.time;
        j.size = a.size;
        j.cls = a.cls;
        j.next_ckpt = 1;
        j.trace_index = trace_index;
        if (pol_.per_job_curves()) {
            j.owned.emplace(pol_.build_curve(a.size));
            j.shared_curve = nullptr;
        } else {
            j.owned.reset();
            j.shared_curve = &pol_.curve(a.cls);
        }
        return idx;
    }

    void insert_waiting(uint32_t ji, double age, double value) {
        waiting_.emplace(WaitKey{value, jobs_[ji].id}, WaitPayload{age, {ji}});
    }

    void freeze_serving() {
        double v = curve_of(jobs_[serving_.front()]).at(serve_age_).value;
        waiting_.emplace(WaitKey{v, serve_min_id_}, WaitPayload{serve_age_, std::move(serving_)});
        serving_.clear();
    }

    void sort_serving() {
        std::sort(serving_.begin(), serving_.end(), [this](uint32_t a, uint32_t b) {
            const EngineJob& ja = jobs_[a];
            const EngineJob& jb = jobs_[b];
            if (ja.size != jb.size) return ja.size < jb.size;
            return ja.id < jb.id;
        });
        serve_min_id_ = jobs_[serving_.front()].id;
        for (uint32_t ji : serving_) serve_min_id_ = std::min(serve_min_id_, jobs_[ji].id);
    }

    void dispatch() {
        auto it = waiting_.begin();
        WaitKey key = it->first;
        WaitPayload pl = std::move(it->second);
        waiting_.erase(it);
        serving_ = std::move(pl.jobs);
        serve_age_ = pl.age;

        const RankFunction* shared = jobs_[serving_.front()].shared_curve;
        bool ps_ok = tie_ == TieMode::processor_sharing && !pol_.has_overlay() &&
                     shared != nullptr &&
                     curve_of(jobs_[serving_.front()]).slope_at(serve_age_) > 0;
        if (ps_ok) {
            // Absorb exactly-tied nodes with the same curve and age; they have
            // identical trajectories until the next event.
            while (!waiting_.empty()) {
                auto nx = waiting_.begin();
                if (nx->first.value != key.value) break;
                if (nx->second.age != serve_age_) break;
                if (jobs_[nx->second.jobs.front()].shared_curve != shared) break;
                for (uint32_t ji : nx->second.jobs) serving_.push_back(ji);
                waiting_.erase(nx);
            }
        } else if (serving_.size() > 1) {
            // Tied cohort that cannot share now: lowest id runs alone.
            std::size_t best = 0;
            for (std::size_t i = 1; i < serving_.size(); ++i)
                if (jobs_[serving_[i]].id < jobs_[serving_[best]].id) best = i;
            uint32_t solo = serving_[best];
            serving_.erase(serving_.begin() + static_cast<std::ptrdiff_t>(best));
            uint64_t rest_min = jobs_[serving_.front()].id;
            for (uint32_t ji : serving_) rest_min = std::min(rest_min, jobs_[ji].id);
            waiting_.emplace(WaitKey{key.value, rest_min},
                             WaitPayload{serve_age_, std::move(serving_)});
            serving_ = {solo};
        }
        sort_serving();
    }

    void advance(double dt, double age_rate) {
        now_ += dt;
        areaN_ += static_cast<double>(live_) * dt;
        busy_ += dt;
        serve_age_ += dt * age_rate;
    }

    void complete_front() {
        uint32_t ji = serving_.front();
        serving_.erase(serving_.begin());
        EngineJob& j = jobs_[ji];
        double resp = now_ - j.arrival;
        if (resp < j.size * (1.0 - 1e-9) - 1e-12)
            throw std::logic_error("engine: response time below job size");
        live_--;
        completions_++;
        end_time_ = now_;
        if (trace_mode_) {
            completion_times_[static_cast<std::size_t>(j.trace_index)] = now_;
        } else {
            if (completions_ > warmup_count_) {
                sumT_ += resp;
                nT_++;
            }
            if (completions_ == warmup_count_) {
                win_t0_ = now_;
                win_area0_ = areaN_;
                win_busy0_ = busy_;
            }
        }
        j.owned.reset();
        free_.push_back(ji);
        if (!serving_.empty()) {
            serve_min_id_ = jobs_[serving_.front()].id;
            for (uint32_t rest : serving_) serve_min_id_ = std::min(serve_min_id_, jobs_[rest].id);
        }
    }

    // After paying a checkpoint (or with gamma == 0, on reaching one).
    void checkpoint_decision() {
        EngineJob& j = jobs_[serving_.front()];
        j.next_ckpt += 1;
        if (serve_age_ >= j.size * (1.0 - 1e-12)) {
            complete_front();
            return;
        }
        if (waiting_.empty()) return;  // nobody to yield to
        Rank r = curve_of(j).at(serve_age_);
        insert_waiting(serving_.front(), serve_age_, r.value);
        serving_.clear();
    }

    void admit(Arrival a) {
        int32_t tix = trace_mode_ ? static_cast<int32_t>(trace_pos_ - 1) : -1;
        uint32_t nj = create_job(a, tix);
        live_++;
        refill_arrival();
        double v0 = curve_of(jobs_[nj]).at(0.0).value;
        if (serving_.empty() || in_overhead_ || pol_.has_overlay()) {
            insert_waiting(nj, 0.0, v0);
            return;
        }
        double v_cur = curve_of(jobs_[serving_.front()]).at(serve_age_).value;
        if (v0 < v_cur) {
            freeze_serving();
            insert_waiting(nj, 0.0, v0);
        } else {
            insert_waiting(nj, 0.0, v0);
        }
    }

    void refill_arrival() {
        if (trace_mode_) {
            if (trace_pos_ < trace_.size()) {
                next_arrival_ = trace_[trace_pos_++];
                have_arrival_ = true;
            } else {
                have_arrival_ = false;
            }
        } else {
            next_arrival_ = gen_->next();
        }
    }

    bool done() const {
        if (completions_ >= target_) return true;
        if (capped_ && now_ >= horizon_) return true;
        return false;
    }

    // Serve through checkpoint cycles with an empty queue in closed form
    // instead of emitting one event per checkpoint.
    void fast_forward_overlay() {
        EngineJob& j = jobs_[serving_.front()];
        double delta = pol_.delta();
        double gamma = pol_.gamma();
        double a = serve_age_;
        int64_t n_total =
            delta == kInf ? 0 : static_cast<int64_t>(std::floor(j.size / delta + 1e-9));
        int64_t remaining = std::max<int64_t>(0, n_total - (j.next_ckpt - 1));
        double completion_elapsed = (j.size - a) + static_cast<double>(remaining) * gamma;
        double t_arr = have_arrival_ ? next_arrival_.time : kInf;

        if (now_ + completion_elapsed <= t_arr) {
            advance(completion_elapsed, 0.0);
            serve_age_ = j.size;
            complete_front();
            return;
        }
        double elapsed = t_arr - now_;
        double lat = delta == kInf ? kInf : static_cast<double>(j.next_ckpt) * delta;
        advance(elapsed, 0.0);
        if (elapsed < lat - a) {
            serve_age_ = a + elapsed;  // arrival lands mid-window
        } else {
            double off = elapsed - (lat - a);
            double cyc = delta + gamma;
            auto c = static_cast<int64_t>(std::floor(off / cyc));
            double rem = off - static_cast<double>(c) * cyc;
            int64_t lattice_idx = j.next_ckpt + c;
            if (rem < gamma) {
                serve_age_ = static_cast<double>(lattice_idx) * delta;
                j.next_ckpt = lattice_idx;  // decision after the overhead will advance it
                in_overhead_ = true;
                overhead_end_ = t_arr + (gamma - rem);
            } else {
                serve_age_ = static_cast<double>(lattice_idx) * delta + (rem - gamma);
                j.next_ckpt = lattice_idx + 1;
            }
        }
        admit(next_arrival_);
    }

    void step_overhead() {
        double t_next = overhead_end_;
        bool is_arrival = have_arrival_ && next_arrival_.time < t_next;
        if (is_arrival) t_next = next_arrival_.time;
        advance(t_next - now_, 0.0);
        if (is_arrival) {
            admit(next_arrival_);
        } else {
            in_overhead_ = false;
            checkpoint_decision();
        }
    }

    void step_serving() {
        std::size_t k = serving_.size();
        double rate = 1.0 / static_cast<double>(k);
        EngineJob& front = jobs_[serving_.front()];
        const RankFunction& cv = curve_of(front);

        double best_t = kInf;
        int ev = EV_ARRIVAL;
        double ev_age = 0;

        if (pol_.has_overlay()) {
            if (waiting_.empty()) {
                fast_forward_overlay();
                return;
            }
            double lat = pol_.delta() == kInf
                             ? kInf
                             : static_cast<double>(front.next_ckpt) * pol_.delta();
            double eps = kSizeEps * std::max(1.0, front.size);
            if (lat < front.size - eps) {
                best_t = now_ + (lat - serve_age_);
                ev = EV_CKPT;
                ev_age = lat;
            } else if (lat <= front.size + eps) {
                best_t = now_ + (lat - serve_age_);
                ev = EV_CKPT_FINAL;
                ev_age = front.size;
            } else {
                best_t = now_ + (front.size - serve_age_);
                ev = EV_COMPLETE;
                ev_age = front.size;
            }
            if (have_arrival_ && next_arrival_.time < best_t) {
                best_t = next_arrival_.time;
                ev = EV_ARRIVAL;
            }
        } else {
            best_t = now_ + (front.size - serve_age_) * static_cast<double>(k);
            ev = EV_COMPLETE;
            ev_age = front.size;
            if (have_arrival_ && next_arrival_.time < best_t) {
                best_t = next_arrival_.time;
                ev = EV_ARRIVAL;
            }
            if (!waiting_.empty()) {
                const auto& wk = waiting_.begin()->first;
                bool strict = serve_min_id_ < wk.min_id;
                double a_p = cv.first_worse_age(serve_age_, wk.value, strict);
                if (a_p < kInf) {
                    double tp = now_ + (a_p - serve_age_) * static_cast<double>(k);
                    if (tp < best_t) {
                        best_t = tp;
                        ev = EV_PREEMPT;
                        ev_age = a_p;
                    }
                }
            }
        }

        advance(best_t - now_, rate);
        switch (ev) {
            case EV_ARRIVAL:
                admit(next_arrival_);
                break;
            case EV_COMPLETE:
                serve_age_ = ev_age;
                while (!serving_.empty() && jobs_[serving_.front()].size == ev_age)
                    complete_front();
                break;
            case EV_CKPT:
            case EV_CKPT_FINAL:
                serve_age_ = ev_age;
                if (pol_.gamma() > 0) {
                    in_overhead_ = true;
                    overhead_end_ = now_ + pol_.gamma();
                } else {
                    checkpoint_decision();
                }
                break;
            case EV_PREEMPT:
                serve_age_ = ev_age;
                freeze_serving();
                break;
            default:
                break;
        }
    }

    void loop() {
        while (!done()) {
            if (in_overhead_) {
                step_overhead();
                continue;
            }
            if (serving_.empty()) {
                if (!waiting_.empty()) {
                    dispatch();
                    continue;
                }
                if (!have_arrival_) break;
                double dt = next_arrival_.time - now_;
                now_ += dt;  // idle: live_ == 0, nothing accrues
                admit(next_arrival_);
                continue;
            }
            step_serving();
        }
    }
};

RepStats run_replication(const CompiledPolicy& pol, const Workload& w, double lambda,
                         const SimConfig& cfg, int rep, bool unstable) {
    Core core(pol, cfg.tie_mode);
    return core.run_poisson(ArrivalGen(cfg.seed, rep, lambda, w), cfg.jobs_per_replication,
                            cfg.warmup_fraction, unstable,
                            unstable ? cfg.unstable_time_horizon : kInf);
}

}  // namespace

std::vector<Arrival> arrival_stream_prefix(uint64_t seed, int replication, double lambda,
                                           const Workload& w, std::size_t count) {
    if (!(lambda > 0)) throw std::invalid_argument("arrival_stream: lambda must be > 0");
    validate(w);
    ArrivalGen gen(seed, replication, lambda, w);
    std::vector<Arrival> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(gen.next());
    return out;
}

SimResult simulate(const PolicySpec& policy, const Workload& w, double lambda,
                   const SimConfig& cfg) {
    validate(w);
    if (!(lambda > 0)) throw std::invalid_argument("simulate: lambda must be > 0");
    if (cfg.jobs_per_replication < 1)
        throw std::invalid_argument("simulate: jobs_per_replication must be >= 1");
    if (cfg.replications < 1) throw std::invalid_argument("simulate: replications must be >= 1");
    if (!(cfg.warmup_fraction >= 0 && cfg.warmup_fraction < 1))
        throw std::invalid_argument("simulate: warmup_fraction must be in [0, 1)");

    CompiledPolicy pol = CompiledPolicy::compile(policy);
    DiscreteDist overall = w.overall();
    double rho_eff = pol.has_overlay() ? rho_prime(overall, lambda, pol.delta(), pol.gamma())
                                       : load(overall, lambda);
    bool unstable = rho_eff >= 1.0;
    if (unstable && !cfg.allow_unstable) throw UnstableError(rho_eff);

    int reps = cfg.replications;
    std::vector<RepStats> stats(static_cast<std::size_t>(reps));
    int workers = cfg.max_workers > 0 ? cfg.max_workers
                                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, reps));

    std::atomic<int> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex err_mu;
    auto work = [&]() {
        try {
            for (int i; (i = next.fetch_add(1)) < reps;)
                stats[static_cast<std::size_t>(i)] =
                    run_replication(pol, w, lambda, cfg, i, unstable);
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mu);
            if (!first_error) first_error = std::current_exception();
        }
    };
    std::vector<std::thread> threads;
    for (int t = 1; t < workers; ++t) threads.emplace_back(work);
    work();
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);

    SimResult r;
    r.rho_effective = rho_eff;
    r.flagged_unstable = unstable;
    double sum = 0;
    for (const auto& s : stats) {
        sum += s.mean_T;
        r.mean_N += s.mean_N;
        r.measured_utilization += s.util;
        r.completed_jobs += s.measured;
        r.flagged_unstable = r.flagged_unstable || s.capped;
    }
    r.mean_T = sum / reps;
    r.mean_N /= reps;
    r.measured_utilization /= reps;
    if (reps > 1) {
        double ss = 0;
        for (const auto& s : stats) ss += (s.mean_T - r.mean_T) * (s.mean_T - r.mean_T);
        double sd = std::sqrt(ss / (reps - 1));
        r.ci_half_width = t_quantile_975(reps - 1) * sd / std::sqrt(static_cast<double>(reps));
    }
    return r;
}

TraceResult simulate_trace(const PolicySpec& policy, std::span<const Arrival> arrivals,
                           TieMode tie_mode) {
    CompiledPolicy pol = CompiledPolicy::compile(policy);
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        if (!(arrivals[i].size > 0))
            throw std::invalid_argument("simulate_trace: sizes must be positive");
        if (i > 0 && arrivals[i].time < arrivals[i - 1].time)
            throw std::invalid_argument("simulate_trace: arrivals must be time-ordered");
    }
    Core core(pol, tie_mode);
    return core.run_trace(arrivals);
}

}  // namespace ranksched
