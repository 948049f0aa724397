#include "fot/loading.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace fot {

double StrategyClass::entry_begin() const {
  if (const auto* a = std::get_if<EntryAtom>(&entry)) return a->time;
  return std::get<EntryInterval>(entry).start;
}

double StrategyClass::entry_end() const {
  if (const auto* a = std::get_if<EntryAtom>(&entry)) return a->time;
  return std::get<EntryInterval>(entry).end;
}

double StrategyClass::mass() const {
  if (const auto* a = std::get_if<EntryAtom>(&entry)) return a->mass;
  const auto& iv = std::get<EntryInterval>(entry);
  return iv.rate * (iv.end - iv.start);
}

std::vector<std::size_t> StrategyClass::nodes(const Instance& inst) const {
  std::vector<std::size_t> out{inst.source()};
  for (std::size_t e : path) out.push_back(inst.arc(e).head);
  return out;
}

void validate_class(const Instance& inst, const StrategyClass& c) {
  const std::string name = c.label.empty() ? std::string("class") : "class " + c.label;
  if (c.path.empty()) throw InstanceError(name + ": empty path");
  std::vector<bool> seen(inst.num_nodes(), false);
  std::size_t v = inst.source();
  seen[v] = true;
  for (std::size_t e : c.path) {
    if (e >= inst.num_arcs()) throw InstanceError(name + ": unknown arc index");
    const Arc& a = inst.arc(e);
    if (a.tail != v) throw InstanceError(name + ": path arcs are not consecutive at " + a.id);
    v = a.head;
    if (seen[v]) throw InstanceError(name + ": path repeats node " + inst.node_name(v));
    seen[v] = true;
  }
  if (v != inst.sink()) throw InstanceError(name + ": path does not end at the sink");
  if (c.waiting.size() != c.path.size() + 1) {
    throw InstanceError(name + ": waiting needs one entry per path node");
  }
  if (const auto* iv = std::get_if<EntryInterval>(&c.entry)) {
    if (!(iv->end > iv->start) || !(iv->rate > 0.0)) {
      throw InstanceError(name + ": entry interval must have positive length and rate");
    }
  } else if (!(std::get<EntryAtom>(c.entry).mass > 0.0)) {
    throw InstanceError(name + ": atom mass must be positive");
  }
}

Outcome::Outcome(Instance inst, StrategyProfile profile,
                 std::vector<PiecewiseLinear> inflow,
                 std::vector<PiecewiseLinear> queue_out,
                 std::vector<std::vector<std::vector<DeparturePiece>>> departures,
                 double horizon)
    : inst_(std::move(inst)),
      profile_(std::move(profile)),
      inflow_(std::move(inflow)),
      queue_out_(std::move(queue_out)),
      departures_(std::move(departures)),
      horizon_(horizon),
      labels_(std::make_shared<LabelCache>()) {}

PiecewiseLinear Outcome::outflow(std::size_t e) const {
  return queue_out_[e].shifted(inst_.arc(e).tau);
}

double Outcome::queue(std::size_t e, double xi) const {
  return std::max(0.0, inflow_[e](xi) - queue_out_[e](xi));
}

double Outcome::queue_left(std::size_t e, double xi) const {
  return std::max(0.0, inflow_[e].left_limit(xi) - queue_out_[e].left_limit(xi));
}

double Outcome::departure(std::size_t c, std::size_t i, double sigma) const {
  const auto& pieces = departures_[c][i];
  if (pieces.empty()) throw LoadError("class has no departure record");
  auto it = std::upper_bound(pieces.begin(), pieces.end(), sigma,
                             [](double s, const DeparturePiece& p) { return s < p.s0; });
  if (it == pieces.begin()) return pieces.front().at(sigma);
  return std::prev(it)->at(sigma);
}

const std::vector<PiecewiseLinear>& Outcome::label_functions() const {
  std::call_once(labels_->once, [&] { labels_->labels = compute_label_functions(*this); });
  return labels_->labels;
}

namespace {

constexpr double kFlatSlope = 1e-12;

struct Piece {
  std::size_t cls = 0;
  std::size_t hop = 0;  // index of the path arc being entered
  double s0 = 0.0;
  double s1 = 0.0;
  double t0 = 0.0;     // arc entry time at sigma = s0
  double slope = 0.0;  // d(entry time) / d sigma

  double time_at(double s) const { return t0 + slope * (s - s0); }
  double t_begin() const { return slope >= 0.0 ? t0 : time_at(s1); }
  double t_end() const { return slope >= 0.0 ? time_at(s1) : t0; }
  bool atom() const { return slope == 0.0; }
};

struct PieceLater {
  bool operator()(const Piece& a, const Piece& b) const {
    if (a.t_begin() != b.t_begin()) return a.t_begin() > b.t_begin();
    if (a.cls != b.cls) return a.cls > b.cls;
    return a.s0 > b.s0;
  }
};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double f = 0.0;   // density inflow rate on [a, b)
  double za = 0.0;  // queue at a, after atoms at a
  double zs = 0.0;  // queue slope on [a, b)
};

struct ArcLog {
  double time = -std::numeric_limits<double>::infinity();
  double z = 0.0;
  std::vector<Segment> segments;
  std::vector<std::pair<double, double>> atoms;  // (time, mass)
};

// Exit of a range of agents from the queue: X(sigma) = x0 + xs (sigma - s0).
struct Exit {
  std::size_t cls = 0;
  std::size_t hop = 0;
  double s0 = 0.0;
  double s1 = 0.0;
  double x0 = 0.0;
  double xs = 0.0;
};

class Loader {
 public:
  Loader(const Instance& inst, const StrategyProfile& profile, const LoadOptions& opts)
      : inst_(inst), profile_(profile), opts_(opts), logs_(inst.num_arcs()) {
    departures_.resize(profile.size());
    for (std::size_t c = 0; c < profile.size(); ++c) {
      departures_[c].resize(profile[c].path.size() + 1);
    }
  }

  Outcome run() {
    for (std::size_t c = 0; c < profile_.size(); ++c) seed(c);
    double delta = std::numeric_limits<double>::infinity();
    for (const Arc& a : inst_.arcs()) delta = std::min(delta, a.tau);

    while (!pending_.empty()) {
      const double w0 = pending_.top().t_begin();
      const double w1 = w0 + delta;
      std::map<std::size_t, std::vector<Piece>> by_arc;
      std::vector<Piece> later;
      while (!pending_.empty() && pending_.top().t_begin() < w1) {
        Piece p = pending_.top();
        pending_.pop();
        if (++processed_ > opts_.piece_cap) {
          throw LoadError("piece cap of " + std::to_string(opts_.piece_cap) + " exceeded");
        }
        if (!p.atom() && p.t_end() > w1) {
          // Split at the window end; the later part waits for its window.
          const double s_cut = p.s0 + (w1 - p.t0) / p.slope;
          Piece now = p;
          Piece rest = p;
          if (p.slope > 0.0) {
            now.s1 = s_cut;
            rest.s0 = s_cut;
            rest.t0 = w1;
          } else {
            rest.s1 = s_cut;
            now.s0 = s_cut;
            now.t0 = w1;
          }
          if (now.s1 > now.s0) by_arc[arc_of(now)].push_back(now);
          if (rest.s1 > rest.s0) later.push_back(rest);
          continue;
        }
        by_arc[arc_of(p)].push_back(p);
      }
      for (auto& p : later) pending_.push(p);
      for (auto& [e, pieces] : by_arc) process_arc(e, pieces);
    }
    for (std::size_t e = 0; e < inst_.num_arcs(); ++e) {
      ArcLog& log = logs_[e];
      if (log.z > 0.0) {
        const double end = log.time + log.z / inst_.arc(e).nu;
        log.segments.push_back({log.time, end, 0.0, log.z, -inst_.arc(e).nu});
        log.time = end;
        log.z = 0.0;
      }
    }

    std::vector<PiecewiseLinear> inflow;
    std::vector<PiecewiseLinear> queue_out;
    for (std::size_t e = 0; e < inst_.num_arcs(); ++e) {
      inflow.push_back(cumulative(logs_[e], true));
      queue_out.push_back(cumulative(logs_[e], false));
    }
    for (auto& per_class : departures_) {
      for (auto& pieces : per_class) {
        std::sort(pieces.begin(), pieces.end(),
                  [](const DeparturePiece& a, const DeparturePiece& b) { return a.s0 < b.s0; });
      }
    }
    return Outcome(inst_, profile_, std::move(inflow), std::move(queue_out),
                   std::move(departures_), horizon());
  }

 private:
  const StrategyClass& cls(std::size_t c) const { return profile_[c]; }
  std::size_t arc_of(const Piece& p) const { return cls(p.cls).path[p.hop]; }

  double theta_of(std::size_t c, double sigma) const {
    if (const auto* a = std::get_if<EntryAtom>(&cls(c).entry)) return a->time;
    return sigma;
  }
  double density(std::size_t c) const {
    if (cls(c).is_atom()) return 1.0;
    return std::get<EntryInterval>(cls(c).entry).rate;
  }

  double horizon() const {
    double h = -std::numeric_limits<double>::infinity();
    bool any_interval = false;
    for (const auto& c : profile_) {
      if (!c.is_atom()) {
        h = any_interval ? std::max(h, c.entry_end()) : c.entry_end();
        any_interval = true;
      }
    }
    if (any_interval) return h;
    for (const auto& c : profile_) h = std::max(h, c.entry_end());
    return h;
  }

  void check_waiting(std::size_t c, std::size_t node, double s0, double s1) const {
    const AffineWait& w = cls(c).waiting[node];
    const double lo = std::min(w.at(theta_of(c, s0)), w.at(theta_of(c, s1)));
    if (lo < -1e-9) {
      std::ostringstream msg;
      msg << "negative waiting " << lo << " in class "
          << (cls(c).label.empty() ? std::to_string(c) : cls(c).label) << " at node "
          << inst_.node_name(cls(c).nodes(inst_)[node]);
      throw LoadError(msg.str());
    }
  }

  // Departure from node `node` of agents [s0, s1) given the time they reach
  // the node, r(sigma) = r0 + rs (sigma - s0).
  void depart(std::size_t c, std::size_t node, double s0, double s1, double r0,
              double rs) {
    if (!(s1 > s0)) return;
    check_waiting(c, node, s0, s1);
    const AffineWait& w = cls(c).waiting[node];
    double d0 = r0 + w.at(theta_of(c, s0));
    double slope = rs + (cls(c).is_atom() ? 0.0 : w.slope);
    if (std::abs(slope) < kFlatSlope) slope = 0.0;
    departures_[c][node].push_back({s0, s1, d0, slope});
    if (node < cls(c).path.size()) pending_.push(Piece{c, node, s0, s1, d0, slope});
  }

  void seed(std::size_t c) {
    validate_class(inst_, cls(c));
    if (const auto* a = std::get_if<EntryAtom>(&cls(c).entry)) {
      depart(c, 0, 0.0, a->mass, a->time, 0.0);
    } else {
      const auto& iv = std::get<EntryInterval>(cls(c).entry);
      depart(c, 0, iv.start, iv.end, iv.start, 1.0);
    }
  }

  void drain(ArcLog& log, double until, double nu) {
    if (!(until > log.time)) return;
    if (log.z > 0.0) {
      const double empty_at = log.time + log.z / nu;
      if (empty_at < until) {
        log.segments.push_back({log.time, empty_at, 0.0, log.z, -nu});
        log.z = 0.0;
      } else {
        log.segments.push_back({log.time, until, 0.0, log.z, -nu});
        log.z = std::max(0.0, log.z - nu * (until - log.time));
      }
    }
    log.time = until;
  }

  void process_arc(std::size_t e, std::vector<Piece>& pieces) {
    const Arc& arc = inst_.arc(e);
    const double nu = arc.nu;
    ArcLog& log = logs_[e];

    // Rounding can put an entry a hair before the time this arc was
    // already processed up to; anything more is a causality violation.
    for (auto& p : pieces) {
      const double gap = log.time - p.t_begin();
      if (gap <= 0.0) continue;
      if (gap > 1e-9 * std::max(1.0, std::abs(log.time))) {
        throw LoadError("arc " + arc.id + " received flow out of order");
      }
      p.t0 += gap;
    }

    // Atom groups, merged when their times agree up to rounding.
    std::vector<Piece> atoms;
    std::vector<Piece> dense;
    for (const auto& p : pieces) (p.atom() ? atoms : dense).push_back(p);
    std::sort(atoms.begin(), atoms.end(),
              [](const Piece& a, const Piece& b) { return a.t0 < b.t0; });
    std::vector<std::pair<double, std::vector<Piece>>> groups;
    for (const auto& p : atoms) {
      if (!groups.empty() &&
          p.t0 - groups.back().first <= 1e-11 * std::max(1.0, std::abs(p.t0))) {
        groups.back().second.push_back(p);
      } else {
        groups.push_back({p.t0, {p}});
      }
    }

    std::vector<double> cuts;
    for (const auto& p : dense) {
      cuts.push_back(p.t_begin());
      cuts.push_back(p.t_end());
    }
    for (const auto& g : groups) cuts.push_back(g.first);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    drain(log, cuts.front(), nu);
    const std::size_t seg_begin = log.segments.size();

    std::size_t gi = 0;
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const double a = cuts[k];
      drain(log, a, nu);
      if (gi < groups.size() && groups[gi].first == a) {
        serve_atoms(e, groups[gi].second, a, log.z);
        for (const auto& p : groups[gi].second) log.z += (p.s1 - p.s0) * density(p.cls);
        double mass = 0.0;
        for (const auto& p : groups[gi].second) mass += (p.s1 - p.s0) * density(p.cls);
        log.atoms.emplace_back(a, mass);
        ++gi;
      }
      if (k + 1 == cuts.size()) break;
      const double b = cuts[k + 1];
      double f = 0.0;
      for (const auto& p : dense) {
        if (p.t_begin() <= a && p.t_end() >= b) {
          f += density(p.cls) / std::abs(p.slope);
        }
      }
      double t = a;
      double z = log.z;
      if (z > 0.0 || f > nu) {
        const double zs = f - nu;
        if (zs < 0.0 && z + zs * (b - a) <= 0.0) {
          const double h = a + z / -zs;
          if (h > a) log.segments.push_back({a, h, f, z, zs});
          t = h;
          z = 0.0;
          if (b > t) log.segments.push_back({t, b, f, 0.0, 0.0});
        } else {
          log.segments.push_back({a, b, f, z, zs});
          z = z + zs * (b - a);
        }
      } else {
        log.segments.push_back({a, b, f, 0.0, 0.0});
      }
      log.z = std::max(0.0, z);
      log.time = b;
    }

    // Exit times of density pieces, piece by piece along the segments just
    // recorded.
    for (const auto& p : dense) {
      const double tb = p.t_begin();
      const double te = p.t_end();
      for (std::size_t i = seg_begin; i < log.segments.size(); ++i) {
        const Segment& s = log.segments[i];
        const double lo = std::max(tb, s.a);
        const double hi = std::min(te, s.b);
        if (!(hi > lo)) continue;
        // sigma range mapped to [lo, hi)
        double sa = p.s0 + (lo - p.t0) / p.slope;
        double sb = p.s0 + (hi - p.t0) / p.slope;
        if (sa > sb) std::swap(sa, sb);
        sa = std::max(sa, p.s0);
        sb = std::min(sb, p.s1);
        if (!(sb > sa)) continue;
        const double t_at = p.time_at(sa);
        const double x0 = t_at + (s.za + s.zs * (t_at - s.a)) / nu;
        const double xs = p.slope * (1.0 + s.zs / nu);
        emit({p.cls, p.hop, sa, sb, x0, xs});
      }
    }
  }

  // Agents of simultaneous atoms are served in order of (entry time, class,
  // sigma), behind the queue z_before.
  void serve_atoms(std::size_t e, const std::vector<Piece>& group, double p,
                   double z_before) {
    const double nu = inst_.arc(e).nu;
    std::vector<double> marks;
    for (const auto& q : group) {
      if (cls(q.cls).is_atom()) {
        marks.push_back(theta_of(q.cls, q.s0));
      } else {
        marks.push_back(q.s0);
        marks.push_back(q.s1);
      }
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    std::vector<const Piece*> blocks;
    for (const auto& q : group) {
      if (cls(q.cls).is_atom()) blocks.push_back(&q);
    }
    std::sort(blocks.begin(), blocks.end(), [&](const Piece* a, const Piece* b) {
      const double ta = theta_of(a->cls, a->s0);
      const double tb = theta_of(b->cls, b->s0);
      if (ta != tb) return ta < tb;
      if (a->cls != b->cls) return a->cls < b->cls;
      return a->s0 < b->s0;
    });

    double ahead = z_before;
    std::size_t bi = 0;
    for (std::size_t k = 0; k < marks.size(); ++k) {
      const double m = marks[k];
      while (bi < blocks.size() && theta_of(blocks[bi]->cls, blocks[bi]->s0) == m) {
        const Piece& q = *blocks[bi];
        emit({q.cls, q.hop, q.s0, q.s1, p + ahead / nu, 1.0 / nu});
        ahead += q.s1 - q.s0;
        ++bi;
      }
      if (k + 1 == marks.size()) break;
      const double next = marks[k + 1];
      double rate = 0.0;
      for (const auto& q : group) {
        if (!cls(q.cls).is_atom() && q.s0 <= m && q.s1 >= next) rate += density(q.cls);
      }
      for (const auto& q : group) {
        if (!cls(q.cls).is_atom() && q.s0 <= m && q.s1 >= next) {
          emit({q.cls, q.hop, m, next, p + ahead / nu, rate / nu});
        }
      }
      ahead += rate * (next - m);
    }
  }

  void emit(const Exit& x) {
    const StrategyClass& c = cls(x.cls);
    const double tau = inst_.arc(c.path[x.hop]).tau;
    depart(x.cls, x.hop + 1, x.s0, x.s1, x.x0 + tau, x.xs);
  }

  PiecewiseLinear cumulative(const ArcLog& log, bool with_atoms) const {
    struct Knot {
      double x;
      double jump;
    };
    std::vector<Knot> knots;
    for (const auto& s : log.segments) {
      knots.push_back({s.a, 0.0});
      knots.push_back({s.b, 0.0});
    }
    if (with_atoms) {
      for (const auto& [t, m] : log.atoms) knots.push_back({t, m});
    }
    if (knots.empty()) return PiecewiseLinear();
    std::stable_sort(knots.begin(), knots.end(),
                     [](const Knot& a, const Knot& b) { return a.x < b.x; });
    std::vector<Knot> merged;
    for (const auto& k : knots) {
      if (!merged.empty() && merged.back().x == k.x) {
        merged.back().jump += k.jump;
      } else {
        merged.push_back(k);
      }
    }
    std::vector<PiecewiseLinear::Point> pts;
    pts.reserve(merged.size());
    std::size_t si = 0;
    double value = 0.0;
    for (std::size_t k = 0; k < merged.size(); ++k) {
      double left = value;
      if (k > 0) {
        const double a = merged[k - 1].x;
        const double b = merged[k].x;
        while (si < log.segments.size() && log.segments[si].b <= a) ++si;
        if (si < log.segments.size() && log.segments[si].a <= a && log.segments[si].b >= b) {
          const Segment& s = log.segments[si];
          const double rate = with_atoms ? s.f : s.f - s.zs;
          left = value + rate * (b - a);
        }
      }
      value = left + merged[k].jump;
      pts.push_back({merged[k].x, left, value});
    }
    return PiecewiseLinear(std::move(pts), 0.0, 0.0);
  }

  const Instance& inst_;
  const StrategyProfile& profile_;
  const LoadOptions& opts_;
  std::vector<ArcLog> logs_;
  std::priority_queue<Piece, std::vector<Piece>, PieceLater> pending_;
  std::vector<std::vector<std::vector<DeparturePiece>>> departures_;
  std::size_t processed_ = 0;
};

void check_coverage(const Instance& inst, const StrategyProfile& profile) {
  std::vector<std::pair<double, double>> events;  // (time, rate change)
  for (const auto& c : profile) {
    if (const auto* iv = std::get_if<EntryInterval>(&c.entry)) {
      events.emplace_back(iv->start, iv->rate);
      events.emplace_back(iv->end, -iv->rate);
    }
  }
  if (events.empty()) return;
  std::sort(events.begin(), events.end());
  const double u0 = inst.inflow_rate();
  const double tol = 1e-9 * std::max(1.0, u0);
  double rate = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    rate += events[i].second;
    const double a = events[i].first;
    const double b = events[i + 1].first;
    if (b - a <= 1e-12 * std::max(1.0, std::abs(a))) continue;
    if (rate < u0 - tol) {
      std::ostringstream msg;
      msg << "entry coverage gap on [" << a << ", " << b << "): rate " << rate;
      throw LoadError(msg.str());
    }
    if (rate > u0 + tol) {
      std::ostringstream msg;
      msg << "entry coverage overlap on [" << a << ", " << b << "): rate " << rate;
      throw LoadError(msg.str());
    }
  }
}

}  // namespace

Outcome load_profile(const Instance& inst, const StrategyProfile& profile,
                     const LoadOptions& opts) {
  if (profile.empty()) throw LoadError("strategy profile is empty");
  if (opts.check_coverage) check_coverage(inst, profile);
  Loader loader(inst, profile, opts);
  return loader.run();
}

}  // namespace fot
