#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gscan/constants.hpp"
#include "gscan/theory.hpp"
#include "json.hpp"

namespace gscan {

inline constexpr const char* kCodeVersion = "gscan-1";

std::uint64_t fnv1a64(std::string_view bytes);

struct NamedConstant {
  std::string name;
  int d = 1;
  ConstantEstimate estimate;
  bool from_cache = false;
};

nlohmann::json to_json(const ConstantEstimate& c);
ConstantEstimate constant_from_json(const nlohmann::json& j);

// Resolves G_d, J_d, E_d and partial profile integrals, consulting an
// on-disk cache keyed by (name, d, parameters, code version) when a cache
// directory is set. Not thread-safe.
class ConstantStore {
 public:
  ConstantStore(std::optional<std::filesystem::path> cache_dir, McParams mc = {},
                QuadParams quad = {});

  ConstantEstimate G_d(int d);
  // d = 1 uses the identity J_1 = G_1; otherwise Monte Carlo nodes.
  ConstantEstimate J_d(int d);
  // d = 1 is exactly 1/4; otherwise the kappa -> 0 extrapolation.
  ConstantEstimate E_d(int d);
  ConstantEstimate G_d_range(int d, double a, double b);
  ConstantEstimate J_d_range(int d, double a, double b);

  // Fills s.constant and s.profile_integral as the family requires.
  void resolve(SettingSpec& s);

  const std::vector<NamedConstant>& used() const noexcept { return used_; }
  nlohmann::json used_json() const;
  const McParams& mc() const noexcept { return mc_; }

  // Kappa nodes for the E_d extrapolation.
  std::vector<double> e_d_kappas = {1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0};

 private:
  template <class Fn>
  ConstantEstimate lookup(const std::string& name, int d, nlohmann::json key_params, Fn&& compute);

  nlohmann::json mc_key() const;

  std::optional<std::filesystem::path> cache_dir_;
  McParams mc_;
  QuadParams quad_;
  std::vector<NamedConstant> used_;
};

}  // namespace gscan
