#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ranksched/dist.hpp"

namespace ranksched {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Two-tier rank: band 0 ("locked") sits strictly below every band-1 rank and
// encodes nonpreemption and mid-checkpoint service. Lower compares earlier.
struct Rank {
    int band;
    double value;

    friend bool operator<(const Rank& a, const Rank& b) {
        if (a.band != b.band) return a.band < b.band;
        return a.value < b.value;
    }
    friend bool operator==(const Rank& a, const Rank& b) {
        return a.band == b.band && a.value == b.value;
    }
};

struct RankSegment {
    double start_age;
    double value;  // rank value at start_age
    double slope;
    int band = 1;
};

// Piecewise-linear rank-vs-age curve on [0, inf); the last segment extends to
// infinity. Immutable once built.
class RankFunction {
  public:
    explicit RankFunction(std::vector<RankSegment> segments);

    const std::vector<RankSegment>& segments() const { return segs_; }

    Rank at(double age) const;
    double slope_at(double age) const;
    std::size_t segment_index(double age) const;

    // Age of the next segment boundary strictly after `age` (inf if none).
    double next_breakpoint(double age) const;

    // First age >= from_age at which the curve's band-1 value becomes worse
    // than `threshold` (strictly greater, or >= when `strict` is false).
    // Returns inf if that never happens. Band-0 segments never qualify.
    double first_worse_age(double from_age, double threshold, bool strict) const;

  private:
    std::vector<RankSegment> segs_;
    // sup of the value over each segment's span, for skipping runs of
    // segments during first_worse_age on long piecewise-constant curves
    std::vector<double> seg_sup_;
    std::vector<double> tree_;  // max-tree over seg_sup_, built for big curves
    std::size_t tree_leaves_ = 0;

    double segment_sup(std::size_t i) const { return seg_sup_[i]; }
    std::size_t first_sup_reaching(std::size_t from, double threshold, bool strict) const;
};

// Rank cutoffs c_1 < ... < c_{n-1} defining n priority levels; implicit
// c_0 = 0 and c_n = inf.
struct CutoffVector {
    std::vector<double> cutoffs;

    std::size_t levels() const { return cutoffs.size() + 1; }
    // Level of a band-1 rank value: i such that c_{i-1} <= v < c_i.
    int level_of(double value) const;
};

void validate(const CutoffVector& c);

struct CheckpointConfig {
    double delta;  // age gap between checkpoints
    double gamma;  // overhead time per checkpoint
};

// ---- Policy specifications ---------------------------------------------

struct Fcfs {};
struct Fb {};
struct Srpt {};
struct Psjf {};
struct Sjf {};
// Serves the best nonempty class; `class_order[i]` is the class served at
// priority i (earlier = better).
struct PPrio {
    std::vector<int> class_order;
};
struct Serpt {
    DiscreteDist dist;
};
struct Gittins {
    DiscreteDist dist;
};
struct ClassSerpt {
    std::map<int, DiscreteDist> dists;
};
struct ClassGittins {
    std::map<int, DiscreteDist> dists;
};
struct PolicySpec;
struct Lpl {
    std::shared_ptr<const PolicySpec> inner;
    CutoffVector cutoffs;
};
struct Checkpointed {
    std::shared_ptr<const PolicySpec> inner;
    CheckpointConfig cfg;
};

struct PolicySpec {
    std::variant<Fcfs, Fb, Srpt, Psjf, Sjf, PPrio, Serpt, Gittins, ClassSerpt, ClassGittins, Lpl,
                 Checkpointed>
        kind;
};

bool needs_size(const PolicySpec& p);
bool needs_class(const PolicySpec& p);
std::string describe(const PolicySpec& p);

// ---- Rank computations ---------------------------------------------------

// E[S - a | S > a]; throws std::domain_error beyond the support.
double serpt_rank(const DiscreteDist& d, double a);

// min over support ages b > a of E[min{S, b} - a | S > a] / P(S <= b | S > a);
// throws std::domain_error beyond the support.
double gittins_rank(const DiscreteDist& d, double a);

double class_rank(const ClassSerpt& p, int cls, double a);
double class_rank(const ClassGittins& p, int cls, double a);

// Piecewise-constant curves sampled on the distribution grid.
RankFunction serpt_curve(const DiscreteDist& d);
RankFunction gittins_curve(const DiscreteDist& d);

// Quantizes a curve's band-1 values into integer levels 1..n; band-0
// segments pass through unchanged.
RankFunction quantize_curve(const RankFunction& inner, const CutoffVector& cutoffs);

// ---- Compiled policies ----------------------------------------------------

// Executable form of a PolicySpec: per-job curve lookup plus the checkpoint
// overlay (delta = inf encodes run-to-completion, i.e. SJF). Curves for
// distribution-based policies are cached at compile time.
class CompiledPolicy {
  public:
    static CompiledPolicy compile(const PolicySpec& spec);

    bool has_overlay() const { return has_overlay_; }
    double delta() const { return delta_; }
    double gamma() const { return gamma_; }

    bool per_job_curves() const { return kind_ == Kind::per_size; }
    bool class_aware() const { return kind_ == Kind::per_class; }

    // Shared or per-class curve; valid for non-per_size policies.
    const RankFunction& curve(int cls) const;
    // Builds the (small) per-job curve for size-aware policies.
    RankFunction build_curve(double size) const;

    // Rank at an age, applying the checkpoint overlay (band 0 off-lattice).
    Rank rank_at(int cls, double size, double age) const;

  private:
    enum class Kind { shared, per_class, per_size };
    enum class Base { fcfs, fb, srpt, psjf, pprio, serpt, gittins, class_serpt, class_gittins };

    Kind kind_ = Kind::shared;
    Base base_ = Base::fcfs;
    bool has_overlay_ = false;
    double delta_ = kInf;
    double gamma_ = 0;
    std::optional<CutoffVector> cutoffs_;
    std::shared_ptr<const RankFunction> shared_;
    std::map<int, std::shared_ptr<const RankFunction>> per_class_;
};

}  // namespace ranksched
