#ifndef AXCAT_MODELS_HPP_
#define AXCAT_MODELS_HPP_

// Bundled CAT models. Kept byte-identical to models/*.cat (checked by the
// test suite).

#include <array>
#include <string>
#include <string_view>

#include "axcat/catlang.hpp"
#include "axcat/error.hpp"

namespace axcat {

struct BundledModel {
  std::string_view name;
  std::string_view text;
};

inline constexpr std::array<BundledModel, 5> kBundledModels = {{
    {"inorder", R"cat("inorder"
# In-order execution: every program-order pair is preserved.
com = co | rf | (rf^-1;co)
acyclic com | po
)cat"},
    {"stl", R"cat("stl"
# Store-to-load forwarding: a load may bypass earlier stores unless the
# store buffer (size w') is full or a fence separates them.
com = co | rf | (rf^-1;co)
win = [W];po;([W];po)^{<=w'-1};[R]
ppo = (po \ (W*R)) | win | fence
acyclic com | ppo
)cat"},
    {"psf", R"cat("psf"
# Predictive store forwarding: loads read through srf, which only requires
# the predicted aliasing of addresses.
scom = co | srf | (srf^-1;co)
acyclic scom | po
)cat"},
    {"tso", R"cat("tso"
# Total store order. The per-location assertion reads "po & loc".
com = co | rf | (rf^-1;co)
com-tso = co | rfe | (rf^-1;co)
po-tso = (po & ((R*M) | (W*W))) | fence
acyclic com | (po & loc)
acyclic com-tso | po-tso
)cat"},
    {"tso-mcu", R"cat("tso-mcu"
# TSO with memory-ordering machine clears: independent loads to different
# addresses may be reordered transiently.
com = co | rf | (rf^-1;co)
com-tso = co | rfe | (rf^-1;co)
po-tso = (po & ((R*W) | (W*W))) | fence | addr
acyclic com | (po & loc)
acyclic com-tso | po-tso
)cat"},
}};

inline const BundledModel* find_bundled_model(std::string_view name) {
  for (const auto& m : kBundledModels)
    if (m.name == name) return &m;
  return nullptr;
}

/// Parses one of the bundled models by name.
inline CatModel bundled_model(std::string_view name) {
  const BundledModel* m = find_bundled_model(name);
  if (!m) throw Error(ErrorKind::InvalidArgument, "unknown model '" + std::string(name) + "'");
  return parse_cat(m->text, std::string(name));
}

}  // namespace axcat

#endif  // AXCAT_MODELS_HPP_
