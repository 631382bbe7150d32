#include "gscan/constant_store.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gscan/error.hpp"

namespace gscan {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json to_json(const ConstantEstimate& c) {
  return {{"value", c.value},
          {"abs_error", c.abs_error},
          {"method", to_string(c.method)},
          {"params", c.params}};
}

ConstantEstimate constant_from_json(const nlohmann::json& j) {
  ConstantEstimate c;
  c.value = j.at("value").get<double>();
  c.abs_error = j.at("abs_error").get<double>();
  const auto m = j.at("method").get<std::string>();
  for (auto e : {EstimateMethod::Series, EstimateMethod::Quadrature, EstimateMethod::MonteCarlo,
                 EstimateMethod::Extrapolation})
    if (to_string(e) == m) c.method = e;
  c.params = j.value("params", nlohmann::json::object());
  return c;
}

ConstantStore::ConstantStore(std::optional<std::filesystem::path> cache_dir, McParams mc,
                             QuadParams quad)
    : cache_dir_(std::move(cache_dir)), mc_(mc), quad_(quad) {}

nlohmann::json ConstantStore::mc_key() const {
  return {{"replications", mc_.replications},
          {"seed", mc_.seed},
          {"half_width", mc_.half_width},
          {"estimator", to_string(mc_.estimator)}};
}

template <class Fn>
ConstantEstimate ConstantStore::lookup(const std::string& name, int d, nlohmann::json key_params,
                                       Fn&& compute) {
  const nlohmann::json key = {
      {"name", name}, {"d", d}, {"params", key_params}, {"version", kCodeVersion}};
  const std::string canonical = key.dump();
  std::filesystem::path file;
  if (cache_dir_) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical)));
    file = *cache_dir_ / (name + "_d" + std::to_string(d) + "_" + hex + ".json");
    std::ifstream in(file);
    if (in) {
      try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("key") == key) {
          auto c = constant_from_json(j.at("estimate"));
          used_.push_back({name, d, c, true});
          return c;
        }
      } catch (const nlohmann::json::exception&) {
        // Unreadable entries are recomputed and overwritten.
      }
    }
  }
  ConstantEstimate c = compute();
  if (cache_dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*cache_dir_, ec);
    if (ec) throw ConfigurationError("cannot create cache directory " + cache_dir_->string());
    const auto tmp = file.string() + ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw ConfigurationError("cannot write cache file " + tmp);
      out << nlohmann::json{{"key", key}, {"estimate", to_json(c)}}.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, file, ec);
    if (ec) throw ConfigurationError("cannot write cache file " + file.string());
  }
  used_.push_back({name, d, c, false});
  return c;
}

ConstantEstimate ConstantStore::G_d(int d) {
  return lookup("G_d", d, {{"tol", 1e-9}}, [&] { return integrate_G_d(d, 1e-9); });
}

ConstantEstimate ConstantStore::J_d(int d) {
  if (d == 1) {
    return lookup("J_d", 1, {{"identity", "G_1"}, {"tol", 1e-9}}, [&] {
      auto c = integrate_G_d(1, 1e-9);
      c.params["identity"] = "J_1 = G_1";
      return c;
    });
  }
  nlohmann::json p = mc_key();
  p["k_min"] = quad_.k_min;
  p["k_max"] = quad_.k_max;
  p["nodes_per_octave"] = quad_.nodes_per_octave;
  p["fit_nodes"] = quad_.fit_nodes;
  return lookup("J_d", d, p, [&] {
    auto r = integrate_J_d(d, mc_, quad_);
    r.total.params["E_d_fit"] = r.small_kappa.limit.value;
    return r.total;
  });
}

ConstantEstimate ConstantStore::E_d(int d) {
  if (d == 1) {
    return lookup("E_d", 1, {{"identity", "F^2"}}, [] {
      ConstantEstimate c;
      c.value = 0.25;
      c.method = EstimateMethod::Series;
      c.params = {{"identity", "E_1 = lim F(kappa)^2"}};
      return c;
    });
  }
  nlohmann::json p = mc_key();
  p["kappas"] = e_d_kappas;
  return lookup("E_d", d, p, [&] { return estimate_E_d_continuous(d, e_d_kappas, mc_).limit; });
}

namespace {

nlohmann::json range_key(double a, double b) {
  return {{"a", a}, {"b", std::isinf(b) ? nlohmann::json("inf") : nlohmann::json(b)}};
}

}  // namespace

ConstantEstimate ConstantStore::G_d_range(int d, double a, double b) {
  auto p = range_key(a, b);
  p["tol"] = 1e-9;
  return lookup("G_d_range", d, p, [&] { return integrate_G_d_range(d, a, b, 1e-9); });
}

ConstantEstimate ConstantStore::J_d_range(int d, double a, double b) {
  if (d == 1) return G_d_range(1, a, b);
  auto p = range_key(a, b);
  p.update(mc_key());
  p["nodes_per_octave"] = quad_.nodes_per_octave;
  return lookup("J_d_range", d, p,
                [&] { return integrate_J_d_range(d, a, b, mc_, quad_.nodes_per_octave); });
}

void ConstantStore::resolve(SettingSpec& s) {
  switch (s.family) {
    case SettingFamily::IID:
    case SettingFamily::ContinuousRect:
      return;
    case SettingFamily::DiscreteCube:
      if (!s.constant) s.constant = J_d(s.d);
      if (!s.profile_integral) {
        const int d = s.d;
        s.profile_integral = [this, d](double a, double b) { return J_d_range(d, a, b); };
      }
      return;
    case SettingFamily::DiscreteRect:
      if (!s.constant) s.constant = G_d(s.d);
      if (!s.profile_integral) {
        const int d = s.d;
        s.profile_integral = [this, d](double a, double b) { return G_d_range(d, a, b); };
      }
      return;
    case SettingFamily::ContinuousCube:
      if (!s.constant) s.constant = E_d(s.d);
      return;
  }
}

nlohmann::json ConstantStore::used_json() const {
  auto out = nlohmann::json::array();
  for (const auto& u : used_)
    out.push_back({{"name", u.name},
                   {"d", u.d},
                   {"value", u.estimate.value},
                   {"abs_error", u.estimate.abs_error},
                   {"method", to_string(u.estimate.method)},
                   {"params", u.estimate.params}});
  return out;
}

}  // namespace gscan
