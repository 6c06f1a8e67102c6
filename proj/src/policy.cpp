#include "ranksched/policy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ranksched {

namespace {
constexpr std::size_t kNpos = static_cast<std::size_t>(-1);
constexpr std::size_t kTreeThreshold = 64;

// Age lies on the checkpoint lattice {0, delta, 2*delta, ...}.
bool on_lattice(double age, double delta) {
    if (age <= 1e-12) return true;
    if (delta == kInf) return false;
    double k = std::round(age / delta);
    return std::abs(age - k * delta) <= 1e-9 * std::max(1.0, age);
}
}  // namespace

RankFunction::RankFunction(std::vector<RankSegment> segments) : segs_(std::move(segments)) {
    if (segs_.empty()) throw std::invalid_argument("RankFunction: no segments");
    if (segs_.front().start_age != 0.0)
        throw std::invalid_argument("RankFunction: first segment must start at age 0");
    for (std::size_t i = 0; i < segs_.size(); ++i) {
        const auto& s = segs_[i];
        if (!std::isfinite(s.slope)) throw std::invalid_argument("RankFunction: non-finite slope");
        if (s.value < 0) throw std::invalid_argument("RankFunction: negative rank value");
        if (i > 0 && !(s.start_age > segs_[i - 1].start_age))
            throw std::invalid_argument("RankFunction: start ages must be strictly increasing");
    }
    seg_sup_.resize(segs_.size());
    for (std::size_t i = 0; i < segs_.size(); ++i) {
        const auto& s = segs_[i];
        if (s.band == 0) {
            seg_sup_[i] = -kInf;  // band 0 never outranked by a band-1 threshold
            continue;
        }
        double end = (i + 1 < segs_.size()) ? segs_[i + 1].start_age : kInf;
        if (s.slope > 0)
            seg_sup_[i] = end == kInf ? kInf : s.value + s.slope * (end - s.start_age);
        else
            seg_sup_[i] = s.value;
    }
    if (segs_.size() > kTreeThreshold) {
        tree_leaves_ = 1;
        while (tree_leaves_ < segs_.size()) tree_leaves_ <<= 1;
        tree_.assign(2 * tree_leaves_, -kInf);
        for (std::size_t i = 0; i < segs_.size(); ++i) tree_[tree_leaves_ + i] = seg_sup_[i];
        for (std::size_t i = tree_leaves_ - 1; i >= 1; --i)
            tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
    }
}

std::size_t RankFunction::segment_index(double age) const {
    auto it = std::upper_bound(segs_.begin(), segs_.end(), age,
                               [](double a, const RankSegment& s) { return a < s.start_age; });
    return static_cast<std::size_t>(it - segs_.begin()) - 1;
}

Rank RankFunction::at(double age) const {
    const auto& s = segs_[segment_index(age)];
    return {s.band, s.value + s.slope * (age - s.start_age)};
}

double RankFunction::slope_at(double age) const { return segs_[segment_index(age)].slope; }

double RankFunction::next_breakpoint(double age) const {
    std::size_t i = segment_index(age);
    return (i + 1 < segs_.size()) ? segs_[i + 1].start_age : kInf;
}

std::size_t RankFunction::first_sup_reaching(std::size_t from, double threshold,
                                             bool strict) const {
    auto qual = [&](double s) { return strict ? s > threshold : s >= threshold; };
    if (from >= segs_.size()) return kNpos;
    if (tree_.empty()) {
        for (std::size_t j = from; j < segs_.size(); ++j)
            if (qual(seg_sup_[j])) return j;
        return kNpos;
    }
    std::size_t i = from + tree_leaves_;
    if (qual(tree_[i])) return from;
    while (true) {
        while (i > 1 && (i & 1)) i >>= 1;  // climb while i is a right child
        if (i <= 1) return kNpos;
        i += 1;
        if (!qual(tree_[i])) continue;
        while (i < tree_leaves_) {
            i <<= 1;
            if (!qual(tree_[i])) i += 1;
        }
        std::size_t idx = i - tree_leaves_;
        return idx < segs_.size() ? idx : kNpos;
    }
}

double RankFunction::first_worse_age(double from_age, double threshold, bool strict) const {
    auto qual = [&](double v) { return strict ? v > threshold : v >= threshold; };
    std::size_t i = segment_index(from_age);
    const auto& cur = segs_[i];
    if (cur.band != 0) {
        double end = (i + 1 < segs_.size()) ? segs_[i + 1].start_age : kInf;
        double v = cur.value + cur.slope * (from_age - cur.start_age);
        if (qual(v)) return from_age;
        if (cur.slope > 0) {
            // t == from_age happens only at a strict-mode tie; no age strictly
            // past the tie exists as a discrete event, so skip it.
            double t = cur.start_age + (threshold - cur.value) / cur.slope;
            if (t < end && t > from_age) return t;
        }
    }
    i += 1;
    while (i < segs_.size()) {
        std::size_t j = first_sup_reaching(i, threshold, strict);
        if (j == kNpos) return kInf;
        const auto& s = segs_[j];
        double end = (j + 1 < segs_.size()) ? segs_[j + 1].start_age : kInf;
        if (qual(s.value)) return s.start_age;
        if (s.slope > 0) {
            double t = s.start_age + (threshold - s.value) / s.slope;
            if (t < end) return t;
        }
        i = j + 1;
    }
    return kInf;
}

int CutoffVector::level_of(double value) const {
    auto it = std::upper_bound(cutoffs.begin(), cutoffs.end(), value);
    return static_cast<int>(it - cutoffs.begin()) + 1;
}

void validate(const CutoffVector& c) {
    for (std::size_t i = 0; i < c.cutoffs.size(); ++i) {
        if (!(c.cutoffs[i] > 0)) throw std::invalid_argument("CutoffVector: cutoffs must be > 0");
        if (i > 0 && !(c.cutoffs[i] > c.cutoffs[i - 1]))
            throw std::invalid_argument("CutoffVector: cutoffs must be strictly increasing");
    }
}

// ---- spec predicates -------------------------------------------------------

bool needs_size(const PolicySpec& p) {
    return std::visit(
        [](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Srpt> || std::is_same_v<T, Psjf> ||
                          std::is_same_v<T, Sjf>)
                return true;
            else if constexpr (std::is_same_v<T, Lpl> || std::is_same_v<T, Checkpointed>)
                return needs_size(*k.inner);
            else
                return false;
        },
        p.kind);
}

bool needs_class(const PolicySpec& p) {
    return std::visit(
        [](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PPrio> || std::is_same_v<T, ClassSerpt> ||
                          std::is_same_v<T, ClassGittins>)
                return true;
            else if constexpr (std::is_same_v<T, Lpl> || std::is_same_v<T, Checkpointed>)
                return needs_class(*k.inner);
            else
                return false;
        },
        p.kind);
}

std::string describe(const PolicySpec& p) {
    std::ostringstream os;
    std::visit(
        [&os](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Fcfs>) os << "fcfs";
            else if constexpr (std::is_same_v<T, Fb>) os << "fb";
            else if constexpr (std::is_same_v<T, Srpt>) os << "srpt";
            else if constexpr (std::is_same_v<T, Psjf>) os << "psjf";
            else if constexpr (std::is_same_v<T, Sjf>) os << "sjf";
            else if constexpr (std::is_same_v<T, PPrio>) os << "pprio";
            else if constexpr (std::is_same_v<T, Serpt>) os << "serpt";
            else if constexpr (std::is_same_v<T, Gittins>) os << "gittins";
            else if constexpr (std::is_same_v<T, ClassSerpt>) os << "class-serpt";
            else if constexpr (std::is_same_v<T, ClassGittins>) os << "class-gittins";
            else if constexpr (std::is_same_v<T, Lpl>)
                os << "lpl(n=" << k.cutoffs.levels() << "," << describe(*k.inner) << ")";
            else
                os << "ckpt(d=" << k.cfg.delta << ",g=" << k.cfg.gamma << ","
                   << describe(*k.inner) << ")";
        },
        p.kind);
    return os.str();
}

// ---- rank computations -----------------------------------------------------

double serpt_rank(const DiscreteDist& d, double a) { return d.expected_remaining(a); }

double gittins_rank(const DiscreteDist& d, double a) {
    if (d.tail(a) <= 0) throw std::domain_error("gittins_rank: age beyond support");
    std::size_t ia = a < d.step() * (1.0 - 1e-9) ? kNpos : d.index_at_or_below(a);
    double pa = ia == kNpos ? 0.0 : d.cum_prob(ia);
    double wa = ia == kNpos ? 0.0 : d.cum_sp(ia);
    double best = kInf;
    // Candidates b below the largest support point contribute nothing between
    // mass points, so scanning positive-mass grid ages suffices.
    for (std::size_t j : d.support()) {
        double b = d.size_at(j);
        if (b <= a) continue;
        double den = d.cum_prob(j) - pa;  // P(a < S <= b), > 0 at a support point
        double tb = 1.0 - d.cum_prob(j);
        double num = d.cum_sp(j) - wa - a * den + (b - a) * tb;
        double ratio = num / den;
        if (ratio < best) best = ratio;
    }
    return best;
}

double class_rank(const ClassSerpt& p, int cls, double a) {
    auto it = p.dists.find(cls);
    if (it == p.dists.end()) throw std::invalid_argument("class_rank: unknown class");
    return serpt_rank(it->second, a);
}

double class_rank(const ClassGittins& p, int cls, double a) {
    auto it = p.dists.find(cls);
    if (it == p.dists.end()) throw std::invalid_argument("class_rank: unknown class");
    return gittins_rank(it->second, a);
}

namespace {

template <typename RankFn>
RankFunction grid_step_curve(const DiscreteDist& d, RankFn&& rank_of) {
    std::vector<RankSegment> segs;
    for (std::size_t i = 0; i < d.grid_points(); ++i) {
        double age = d.size_at(i);
        if (d.tail(age) <= 0) break;
        segs.push_back({age, rank_of(age), 0.0, 1});
    }
    if (segs.empty()) throw std::invalid_argument("curve: distribution has no support");
    return RankFunction(std::move(segs));
}

}  // namespace

RankFunction serpt_curve(const DiscreteDist& d) {
    return grid_step_curve(d, [&](double a) { return serpt_rank(d, a); });
}

RankFunction gittins_curve(const DiscreteDist& d) {
    return grid_step_curve(d, [&](double a) { return gittins_rank(d, a); });
}

RankFunction quantize_curve(const RankFunction& inner, const CutoffVector& cutoffs) {
    validate(cutoffs);
    std::vector<RankSegment> out;
    auto emit = [&out](double start, int level) {
        double v = static_cast<double>(level);
        if (!out.empty() && out.back().band == 1 && out.back().value == v) return;
        if (!out.empty() && out.back().start_age == start) out.pop_back();
        out.push_back({start, v, 0.0, 1});
    };
    const auto& segs = inner.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        double end = (i + 1 < segs.size()) ? segs[i + 1].start_age : kInf;
        if (s.band == 0) {
            out.push_back(s);
            continue;
        }
        int level = cutoffs.level_of(s.value);
        emit(s.start_age, level);
        if (s.slope > 0) {
            // Level steps up when the value reaches the upper edge c_level.
            while (level <= static_cast<int>(cutoffs.cutoffs.size())) {
                double edge = cutoffs.cutoffs[level - 1];
                double t = s.start_age + (edge - s.value) / s.slope;
                if (!(t < end)) break;
                ++level;
                emit(std::max(t, s.start_age), level);
            }
        } else if (s.slope < 0) {
            // Level steps down when the value drops strictly below c_{level-1}.
            while (level >= 2) {
                double edge = cutoffs.cutoffs[level - 2];
                double t = s.start_age + (edge - s.value) / s.slope;
                if (!(t < end)) break;
                --level;
                emit(std::max(t, s.start_age), level);
            }
        }
    }
    return RankFunction(std::move(out));
}

// ---- CompiledPolicy --------------------------------------------------------

CompiledPolicy CompiledPolicy::compile(const PolicySpec& spec) {
    CompiledPolicy cp;
    const PolicySpec* cur = &spec;

    if (const auto* ck = std::get_if<Checkpointed>(&cur->kind)) {
        if (!(ck->cfg.delta > 0)) throw std::invalid_argument("Checkpointed: delta must be > 0");
        if (ck->cfg.gamma < 0) throw std::invalid_argument("Checkpointed: gamma must be >= 0");
        cp.has_overlay_ = true;
        cp.delta_ = ck->cfg.delta;
        cp.gamma_ = ck->cfg.gamma;
        cur = ck->inner.get();
        if (std::holds_alternative<Checkpointed>(cur->kind))
            throw std::invalid_argument("Checkpointed may appear at most once");
    }

    if (const auto* lp = std::get_if<Lpl>(&cur->kind)) {
        validate(lp->cutoffs);
        cp.cutoffs_ = lp->cutoffs;
        cur = lp->inner.get();
        if (std::holds_alternative<Lpl>(cur->kind))
            throw std::invalid_argument("Lpl may not wrap an LPL policy");
        if (std::holds_alternative<Checkpointed>(cur->kind))
            throw std::invalid_argument("Checkpointed must be outermost");
    }

    auto maybe_quantize = [&cp](RankFunction f) {
        return cp.cutoffs_ ? quantize_curve(f, *cp.cutoffs_) : std::move(f);
    };

    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Fcfs>) {
                cp.kind_ = Kind::shared;
                cp.base_ = Base::fcfs;
                cp.shared_ = std::make_shared<const RankFunction>(
                    maybe_quantize(RankFunction({{0.0, 1.0, 0.0, 1}})));
            } else if constexpr (std::is_same_v<T, Fb>) {
                cp.kind_ = Kind::shared;
                cp.base_ = Base::fb;
                cp.shared_ = std::make_shared<const RankFunction>(
                    maybe_quantize(RankFunction({{0.0, 0.0, 1.0, 1}})));
            } else if constexpr (std::is_same_v<T, Srpt>) {
                cp.kind_ = Kind::per_size;
                cp.base_ = Base::srpt;
            } else if constexpr (std::is_same_v<T, Psjf>) {
                cp.kind_ = Kind::per_size;
                cp.base_ = Base::psjf;
            } else if constexpr (std::is_same_v<T, Sjf>) {
                if (cp.has_overlay_)
                    throw std::invalid_argument("SJF cannot be checkpoint-wrapped");
                cp.kind_ = Kind::per_size;
                cp.base_ = Base::psjf;  // rank is the original size; locking via overlay
                cp.has_overlay_ = true;
                cp.delta_ = kInf;
                cp.gamma_ = 0.0;
            } else if constexpr (std::is_same_v<T, PPrio>) {
                if (k.class_order.empty()) throw std::invalid_argument("PPrio: empty class order");
                cp.kind_ = Kind::per_class;
                cp.base_ = Base::pprio;
                for (std::size_t i = 0; i < k.class_order.size(); ++i) {
                    RankFunction f({{0.0, static_cast<double>(i + 1), 0.0, 1}});
                    cp.per_class_[k.class_order[i]] =
                        std::make_shared<const RankFunction>(maybe_quantize(std::move(f)));
                }
            } else if constexpr (std::is_same_v<T, Serpt>) {
                cp.kind_ = Kind::shared;
                cp.base_ = Base::serpt;
                cp.shared_ =
                    std::make_shared<const RankFunction>(maybe_quantize(serpt_curve(k.dist)));
            } else if constexpr (std::is_same_v<T, Gittins>) {
                cp.kind_ = Kind::shared;
                cp.base_ = Base::gittins;
                cp.shared_ =
                    std::make_shared<const RankFunction>(maybe_quantize(gittins_curve(k.dist)));
            } else if constexpr (std::is_same_v<T, ClassSerpt>) {
                if (k.dists.empty()) throw std::invalid_argument("ClassSerpt: no class dists");
                cp.kind_ = Kind::per_class;
                cp.base_ = Base::class_serpt;
                for (const auto& [cls, d] : k.dists)
                    cp.per_class_[cls] =
                        std::make_shared<const RankFunction>(maybe_quantize(serpt_curve(d)));
            } else if constexpr (std::is_same_v<T, ClassGittins>) {
                if (k.dists.empty()) throw std::invalid_argument("ClassGittins: no class dists");
                cp.kind_ = Kind::per_class;
                cp.base_ = Base::class_gittins;
                for (const auto& [cls, d] : k.dists)
                    cp.per_class_[cls] =
                        std::make_shared<const RankFunction>(maybe_quantize(gittins_curve(d)));
            } else {
                throw std::invalid_argument("policy nesting not supported: " + describe(spec));
            }
        },
        cur->kind);
    return cp;
}

const RankFunction& CompiledPolicy::curve(int cls) const {
    if (kind_ == Kind::shared) return *shared_;
    if (kind_ == Kind::per_class) {
        auto it = per_class_.find(cls);
        if (it == per_class_.end())
            throw std::invalid_argument("policy has no curve for class " + std::to_string(cls));
        return *it->second;
    }
    throw std::logic_error("curve(): size-aware policy needs build_curve(size)");
}

RankFunction CompiledPolicy::build_curve(double size) const {
    if (kind_ != Kind::per_size) throw std::logic_error("build_curve(): policy is not size-aware");
    if (!(size > 0)) throw std::invalid_argument("build_curve: size must be > 0");
    RankFunction f = base_ == Base::srpt
                         ? RankFunction({{0.0, size, -1.0, 1}, {size, 0.0, 0.0, 1}})
                         : RankFunction({{0.0, size, 0.0, 1}});
    return cutoffs_ ? quantize_curve(f, *cutoffs_) : f;
}

Rank CompiledPolicy::rank_at(int cls, double size, double age) const {
    if (has_overlay_ && !on_lattice(age, delta_)) return {0, 0.0};
    if (kind_ == Kind::per_size) return build_curve(size).at(age);
    return curve(cls).at(age);
}

}  // namespace ranksched
