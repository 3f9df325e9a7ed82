#include "cpdshift/json_io.hpp"

#include <initializer_list>
#include <string>

namespace cpd {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); }

void only_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) bad(std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) bad("unknown key '" + item.key() + "' in " + what);
  }
}

const Json& field(const Json& j, const char* key, const char* what) {
  if (!j.contains(key)) bad(std::string(what) + " is missing '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

template <class F>
auto wrap(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidSpec) throw;
    bad(e.what());
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
}

Json optional_witness(const std::optional<Witness>& w) { return w ? to_json(*w) : Json(nullptr); }

}  // namespace

Json to_json(const MomentSequence& seq) { return Json(seq.to_vector()); }

MomentSequence sequence_from_json(const Json& j) {
  return wrap([&] { return MomentSequence(numbers(j, "sequence")); });
}

Json to_json(const AtomicMeasure& mu) {
  Json atoms = Json::array();
  for (const auto& a : mu) atoms.push_back(Json::array({a.node, a.mass}));
  return Json{{"atoms", atoms}};
}

AtomicMeasure measure_from_json(const Json& j) {
  return wrap([&] {
    only_keys(j, {"atoms"}, "measure");
    const auto& atoms = field(j, "atoms", "measure");
    if (!atoms.is_array()) bad("measure atoms must be an array");
    std::vector<Atom> out;
    for (const auto& a : atoms) {
      const auto pair = numbers(a, "atom");
      if (pair.size() != 2) bad("each atom must be [node, mass]");
      if (!(pair[1] > 0.0)) bad("atom masses must be positive");
      out.push_back({pair[0], pair[1]});
    }
    return AtomicMeasure(std::move(out));
  });
}

Json to_json(const WeightedShift& t) {
  Json out;
  out["type"] = t.kind();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EventuallyConstant>) {
          out["head"] = m.head;
          out["tail"] = m.tail;
        } else if constexpr (std::is_same_v<T, BergerGenerated>) {
          out["measure"] = to_json(m.measure);
        } else {
          out["p"] = m.p;
        }
      },
      t.model());
  if (t.scale() != 1.0) out["scale"] = t.scale();
  return out;
}

WeightedShift shift_from_json(const Json& j) {
  return wrap([&] {
    if (!j.is_object()) bad("shift spec must be a JSON object");
    const auto& type = field(j, "type", "shift spec");
    if (!type.is_string()) bad("shift type must be a string");
    const auto kind = type.get<std::string>();
    std::optional<WeightedShift> t;
    if (kind == "eventually_constant") {
      only_keys(j, {"type", "head", "tail", "scale"}, "eventually_constant spec");
      t = WeightedShift::eventually_constant(numbers(field(j, "head", "eventually_constant spec"), "head"),
                                             number(field(j, "tail", "eventually_constant spec"), "tail"));
    } else if (kind == "berger") {
      only_keys(j, {"type", "measure", "scale"}, "berger spec");
      t = WeightedShift::berger(measure_from_json(field(j, "measure", "berger spec")));
    } else if (kind == "poly3iso") {
      only_keys(j, {"type", "p", "scale"}, "poly3iso spec");
      t = WeightedShift::poly_three_isometry(numbers(field(j, "p", "poly3iso spec"), "p"));
    } else {
      bad("unknown shift type '" + kind + "'");
    }
    if (j.contains("scale")) t = t->scaled(number(j.at("scale"), "scale"));
    return *t;
  });
}

Json to_json(const ScalarTriplet& t) { return Json{{"b", t.b}, {"c", t.c}, {"F", to_json(t.F)}}; }

ScalarTriplet triplet_from_json(const Json& j, const ToleranceConfig& tol) {
  return wrap([&] {
    only_keys(j, {"b", "c", "F"}, "triplet");
    return make_triplet(number(field(j, "b", "triplet"), "b"), number(field(j, "c", "triplet"), "c"),
                        measure_from_json(field(j, "F", "triplet")), tol);
  });
}

Json to_json(const SubnormalityCertificate& c) {
  Json out;
  out["passed"] = c.passed;
  out["first_failure"] = c.first_failure.empty() ? Json(nullptr) : Json(c.first_failure);
  out["a"] = Json{{"integral_inverse_square", c.mass_integral}, {"bound", 1.0}, {"ok", c.mass_ok}};
  out["b"] = Json{{"integral_inverse", c.b_integral}, {"residual", c.b_residual}, {"ok", c.b_ok}};
  out["c"] = Json{{"value", c.c_value}, {"ok", c.c_ok}};
  return out;
}

Json to_json(const ToleranceConfig& tol) {
  return Json{{"eps_psd", tol.eps_psd},
              {"eps_eq", tol.eps_eq},
              {"eps_node", tol.eps_node},
              {"singular_band", tol.singular_band}};
}

Json to_json(const Witness& w) {
  Json out;
  out["kind"] = w.kind;
  out["basis_index"] = w.basis_index;
  out["offset"] = w.offset;
  out["size"] = w.size;
  out["coefficients"] = w.coefficients;
  out["value"] = w.value;
  return out;
}

Json to_json(const ClassVerdict& v) {
  Json out;
  out["status"] = to_string(v.status);
  out["basis_range"] = v.basis_range;
  out["order"] = v.order;
  out["witness"] = optional_witness(v.witness);
  if (v.generic_status) {
    out["generic_status"] = to_string(*v.generic_status);
    out["generic_witness"] = optional_witness(v.generic_witness);
  }
  return out;
}

Json to_json(const NormaloidVerdict& v) {
  Json out = to_json(v.verdict);
  out["norm"] = v.norm;
  out["spectral_radius"] = v.spectral_radius;
  out["radius_exact"] = v.radius_exact;
  if (!v.radius_exact) {
    out["window"] = v.window;
    out["window_monotone"] = v.window_monotone;
  }
  return out;
}

Json to_json(const ClassReport& r) {
  Json out;
  out["subnormal"] = to_json(r.subnormal);
  out["quasinormal"] = to_json(r.quasinormal);
  out["normal"] = to_json(r.normal);
  out["cpd"] = to_json(r.cpd);
  out["normaloid"] = to_json(r.normaloid);
  Json iso = to_json(r.m_isometry);
  iso["m"] = r.m;
  out["m_isometry"] = iso;
  return out;
}

Json to_json(const RootEvidence& e) {
  Json out;
  out["theorem"] = e.theorem;
  out["n"] = e.n;
  if (e.m) out["m"] = e.m;
  Json premises = Json::object();
  for (const auto& p : e.premises) premises[p.name] = to_string(p.verdict);
  out["premises"] = premises;
  out["conclusion"] = Json{{e.conclusion.name, to_string(e.conclusion.verdict)}};
  Json mech = Json::array();
  for (const auto& m : e.mechanisms) {
    Json item{{"name", m.name}, {"passed", m.passed}, {"value", m.value}};
    if (!m.detail.empty()) item["detail"] = m.detail;
    mech.push_back(item);
  }
  out["mechanisms"] = mech;
  out["status"] = to_string(e.status);
  return out;
}

}  // namespace cpd
