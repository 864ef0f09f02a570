#include <unordered_map>

#include "prelat/constructions.hpp"

namespace prelat {

namespace {

Nat fuel_for(Machine& m) { return m.config().fuel_budget + m.now(); }

Nat eval_total(Machine& m, Nat code, Nat arg, const char* what) {
  auto r = m.eval(code, arg, fuel_for(m));
  if (!r.converged) throw Error(std::string(what) + " did not converge");
  return r.value;
}

}  // namespace

const TotalizerCall* TotalizerLog::find(const std::vector<Nat>& D, Nat e, Nat x) const {
  auto it = calls.find({D, e, x});
  return it == calls.end() ? nullptr : &it->second;
}

const TotalizerCall* TotalizerLog::by_result(Nat code) const {
  for (auto& [key, call] : calls)
    if (call.result == code) return &call;
  return nullptr;
}

Totalizer totalizer_from_ei(LatticePtr lattice, ProductiveFn p, TraceSink trace) {
  auto log = std::make_shared<TotalizerLog>();
  Totalizer out;
  out.log = log;
  out.fn = [lattice, p, trace, log](const std::vector<Nat>& D, Nat e, Nat x) -> Nat {
    auto key = std::make_tuple(D, e, x);
    auto found = log->calls.find(key);
    if (found != log->calls.end()) return found->second.result;
    Machine& m = lattice->machine();
    PreLattice* L = lattice.get();

    struct Shared {
      std::vector<Nat> D, c;
    };
    auto sh = std::make_shared<Shared>();
    sh->D = D;
    sh->c.assign(D.size(), kNever);

    TotalizerCall call;
    call.D = D;
    call.e = e;
    call.x = x;
    call.trigger = m.define_dynamic(
        [L, sh, e, x](Nat, Ctx& c) -> std::optional<Nat> {
          auto y = c.value(e, x);
          if (!y) return std::nullopt;
          for (std::size_t i = 0; i < sh->D.size(); ++i)
            if (sh->D[i] == *y) return i;
          if (!L->valid(*y)) return std::nullopt;
          for (std::size_t i = 0; i < sh->D.size(); ++i)
            if (L->equiv(*y, sh->D[i], c.fact_stage())) return i;
          return std::nullopt;
        },
        "trigger");
    Nat trig = call.trigger;
    for (std::size_t i = 0; i < D.size(); ++i) {
      Nat u = m.define_dynamic(
          [L, sh, trig, i, trace](Nat y, Ctx& c) -> std::optional<Nat> {
            if (y == sh->c[i]) {
              auto t = c.value(trig, 0);
              if (t && *t == i) {
                trace("deferred_defined", c.stage(), {y, sh->D[i]}, "c enumerated into u: d0");
                return 0;
              }
            }
            if (L->valid(y) && L->holds(y, L->bottom(), c.fact_stage())) return 0;
            return std::nullopt;
          },
          "k-u");
      Nat v = m.define_dynamic(
          [L, sh, trig, i](Nat y, Ctx& c) -> std::optional<Nat> {
            if (y == sh->c[i]) {
              auto t = c.value(trig, 0);
              if (t && *t != i) return 0;
            }
            if (L->valid(y) && L->holds(L->top(), y, c.fact_stage())) return 0;
            return std::nullopt;
          },
          "k-v");
      Nat ci = eval_total(m, p.code, pair(u, v), "productive function");
      sh->c[i] = ci;
      call.u.push_back(u);
      call.v.push_back(v);
      call.c.push_back(ci);
    }
    Nat acc = L->bottom();
    for (std::size_t i = 0; i < D.size(); ++i) {
      Nat a = L->meet(D[i], call.c[i]);
      acc = i == 0 ? a : L->join(acc, a);
    }
    call.result = acc;
    log->calls.emplace(key, std::move(call));
    return acc;
  };
  return out;
}

Nat bounded_k(PreLattice& lattice, Nat a, Nat b, const std::vector<Nat>& D, Nat e, Nat x, const Totalizer& j) {
  return lattice.join(lattice.meet(j(D, e, x), b), a);
}

ProductiveFn productive_from_totalizer(LatticePtr lattice, Totalizer k, Nat a, Nat b) {
  Machine& m = lattice->machine();
  Machine* mp = &m;
  auto memo = std::make_shared<std::unordered_map<Nat, Nat>>();
  ProductiveFn out;
  out.code = m.define_native(
      [mp, k, a, b, memo](Nat z) -> std::optional<Nat> {
        auto it = memo->find(z);
        if (it != memo->end()) return it->second;
        auto [u, v] = unpair(z);
        auto result = std::make_shared<Nat>(kNever);
        Nat e = mp->define_dynamic(
            [u = u, v = v, a, b, result](Nat, Ctx& c) -> std::optional<Nat> {
              if (c.value(u, *result)) return b;
              if (c.value(v, *result)) return a;
              return std::nullopt;
            },
            "answer");
        *result = k({a, b}, e, 0);
        memo->emplace(z, *result);
        return *result;
      },
      "from-totalizer");
  out.total = true;
  return out;
}

UniformProductive uniform_from_totalizer(LatticePtr lattice, Totalizer k) {
  Machine& m = lattice->machine();
  Machine* mp = &m;
  auto per_pair = std::make_shared<std::map<std::pair<Nat, Nat>, Nat>>();
  UniformProductive out;
  out.code = m.define_native(
      [mp, lattice, k, per_pair](Nat z) -> std::optional<Nat> {
        auto [ab, uv] = unpair(z);
        auto [a, b] = unpair(ab);
        auto it = per_pair->find({a, b});
        if (it == per_pair->end()) it = per_pair->emplace(std::make_pair(a, b), productive_from_totalizer(lattice, k, a, b).code).first;
        return eval_total(*mp, it->second, uv, "pair productive function");
      },
      "uniform");
  return out;
}

ProductiveFn interval_productive(LatticePtr lattice, Nat a, Nat b, ProductiveFn q, TraceSink trace) {
  Machine& m = lattice->machine();
  Machine* mp = &m;
  PreLattice* L = lattice.get();
  auto memo = std::make_shared<std::unordered_map<Nat, Nat>>();
  ProductiveFn out;
  out.code = m.define_native(
      [mp, lattice, L, a, b, q, trace, memo](Nat z) -> std::optional<Nat> {
        auto it = memo->find(z);
        if (it != memo->end()) return it->second;
        auto [u, v] = unpair(z);
        struct Shared {
          Nat q = kNever, j = kNever;
        };
        auto sh = std::make_shared<Shared>();
        Nat up = mp->define_dynamic(
            [L, a, u = u, sh, trace](Nat y, Ctx& c) -> std::optional<Nat> {
              if (y == sh->q && c.value(u, sh->j)) {
                trace("deferred_defined", c.stage(), {sh->q, sh->j}, "j seen in W_u: q(u',v') enumerated into W_u'");
                return 0;
              }
              if (L->valid(y) && L->equiv(y, a, c.fact_stage())) return 0;
              return std::nullopt;
            },
            "interval-u");
        Nat vp = mp->define_dynamic(
            [L, b, v = v, sh, trace](Nat y, Ctx& c) -> std::optional<Nat> {
              if (y == sh->q && c.value(v, sh->j)) {
                trace("deferred_defined", c.stage(), {sh->q, sh->j}, "j seen in W_v: q(u',v') enumerated into W_v'");
                return 0;
              }
              if (L->valid(y) && L->equiv(y, b, c.fact_stage())) return 0;
              return std::nullopt;
            },
            "interval-v");
        sh->q = eval_total(*mp, q.code, pair(up, vp), "interval productive function");
        sh->j = L->meet(L->join(a, sh->q), b);
        memo->emplace(z, sh->j);
        return sh->j;
      },
      "interval-productive");
  out.total = q.total;
  return out;
}

ProductiveFn interval_space_productive(std::shared_ptr<IntervalLattice> interval, ProductiveFn p) {
  Machine& m = interval->machine();
  Machine* mp = &m;
  IntervalLattice* I = interval.get();
  auto memo = std::make_shared<std::unordered_map<Nat, Nat>>();
  auto image = [mp, I](Nat w) {
    return mp->define_dynamic(
        [I, w](Nat y, Ctx& c) -> std::optional<Nat> {
          auto t = I->h_inv(y);
          if (c.value(w, t ? *t : I->clamp_code(y))) return 0;
          return std::nullopt;
        },
        "h-image");
  };
  ProductiveFn out;
  out.code = m.define_native(
      [mp, interval, I, p, image, memo](Nat z) -> std::optional<Nat> {
        auto it = memo->find(z);
        if (it != memo->end()) return it->second;
        auto [u, v] = unpair(z);
        Nat j = eval_total(*mp, p.code, pair(image(u), image(v)), "base productive function");
        auto t = I->h_inv(j);
        Nat r = t ? *t : I->clamp_code(j);
        memo->emplace(z, r);
        return r;
      },
      "interval-space-productive");
  out.total = p.total;
  return out;
}

Totalizer ufp_from_uei(LatticePtr lattice, UniformProductive chi, TraceSink trace) {
  struct Piece {
    std::shared_ptr<IntervalLattice> interval;
    Totalizer k;
  };
  auto pieces = std::make_shared<std::map<std::pair<Nat, Nat>, Piece>>();
  auto images = std::make_shared<std::map<std::tuple<Nat, Nat, Nat>, Nat>>();
  auto memo = std::make_shared<std::map<std::tuple<std::vector<Nat>, Nat, Nat>, Nat>>();
  Totalizer out;
  out.fn = [lattice, chi, trace, pieces, images, memo](const std::vector<Nat>& D, Nat e, Nat x) -> Nat {
    auto key = std::make_tuple(D, e, x);
    auto found = memo->find(key);
    if (found != memo->end()) return found->second;
    PreLattice& L = *lattice;
    Machine& m = L.machine();
    if (D.empty()) return L.bottom();
    Nat a = L.meet_all(D), b = L.join_all(D);
    auto pit = pieces->find({a, b});
    if (pit == pieces->end()) {
      Piece piece;
      piece.interval = std::make_shared<IntervalLattice>(lattice, a, b);
      Machine* mp = &m;
      Nat chi_code = chi.code;
      ProductiveFn q;
      q.code = m.define_native(
          [mp, chi_code, a = a, b = b](Nat z) -> std::optional<Nat> {
            return eval_total(*mp, chi_code, pair(pair(a, b), z), "uniform productive function");
          },
          "chi");
      q.total = true;
      ProductiveFn pb = interval_productive(lattice, a, b, q, trace.sub("interval"));
      ProductiveFn pi = interval_space_productive(piece.interval, pb);
      piece.k = totalizer_from_ei(piece.interval, pi, trace.sub("interval-k"));
      pit = pieces->emplace(std::make_pair(a, b), std::move(piece)).first;
    }
    IntervalLattice* I = pit->second.interval.get();
    auto iit = images->find({e, a, b});
    if (iit == images->end()) {
      Nat ep = m.define_dynamic(
          [e, I](Nat y, Ctx& c) -> std::optional<Nat> {
            auto r = c.value(e, y);
            if (!r) return std::nullopt;
            auto t = I->h_inv(*r);
            return t ? *t : I->clamp_code(*r);
          },
          "h-compose");
      iit = images->emplace(std::make_tuple(e, a, b), ep).first;
    }
    std::vector<Nat> hD;
    for (Nat d : D) {
      auto t = I->h_inv(d);
      hD.push_back(t ? *t : I->clamp_code(d));
    }
    Nat r = I->h(pit->second.k(hD, iit->second, x));
    memo->emplace(key, r);
    return r;
  };
  return out;
}

Totalizer sum_totalizer(std::shared_ptr<SumLattice> sum, Totalizer first, Totalizer second) {
  auto memo = std::make_shared<std::map<std::tuple<std::vector<Nat>, Nat, Nat>, Nat>>();
  Totalizer out;
  out.fn = [sum, first, second, memo](const std::vector<Nat>& D, Nat e, Nat x) -> Nat {
    auto key = std::make_tuple(D, e, x);
    auto found = memo->find(key);
    if (found != memo->end()) return found->second;
    Machine& m = sum->machine();
    SumLattice* S = sum.get();
    auto projector = [&](bool left) {
      return m.define_dynamic(
          [S, D, e, x, left](Nat, Ctx& c) -> std::optional<Nat> {
            auto y = c.value(e, x);
            if (!y) return std::nullopt;
            for (Nat d : D)
              if (d == *y || (S->valid(*y) && S->equiv(*y, d, c.fact_stage()))) return left ? pi0(d) : pi1(d);
            return std::nullopt;
          },
          left ? "project-0" : "project-1");
    };
    std::vector<Nat> D0, D1;
    for (Nat d : D) {
      D0.push_back(pi0(d));
      D1.push_back(pi1(d));
    }
    Nat r = pair(first(D0, projector(true), 0), second(D1, projector(false), 0));
    memo->emplace(key, r);
    return r;
  };
  return out;
}

}  // namespace prelat
