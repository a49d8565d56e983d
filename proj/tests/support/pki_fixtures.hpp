#pragma once

// Small hierarchies shared by the unit and acceptance tests.

#include "sdna/pki.hpp"

namespace sdna::testing {

struct Hierarchy {
  pki::Issued root;
  pki::Issued intermediate;
  pki::Issued leaf;
};

inline Hierarchy make_hierarchy(pki::CertType type, const std::string& org, Rng& rng) {
  using namespace pki;
  Hierarchy h{create_root(type, {org + " root", "root@" + org}, rng), {}, {}};
  auto ik = SigningKey::generate(rng);
  h.intermediate = {issue_certificate(h.root.cert, h.root.key,
                                      {{org + " intermediate", "int@" + org}, ik.verify_key(), type, Level::Intermediate},
                                      rng),
                    ik};
  auto lk = SigningKey::generate(rng);
  h.leaf = {issue_certificate(h.intermediate.cert, h.intermediate.key,
                              {{org + " leaf", "leaf@" + org}, lk.verify_key(), type, Level::Leaf}, rng),
            lk};
  return h;
}

inline pki::CertChain chain_for(const Hierarchy& h, std::optional<pki::Token> token) {
  return {std::move(token), {}, {h.leaf.cert, h.intermediate.cert, h.root.cert}};
}

}  // namespace sdna::testing
