#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sdna/scenario.hpp"

namespace sdna::cli {

namespace {

// --- files ----------------------------------------------------------------------

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Malformed, "cannot read " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text(const std::string& path) { return to_string(read_file(path)); }

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Malformed, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

void write_text(const std::string& path, const std::string& text) { write_file(path, to_bytes(text)); }

// A certificate "stem" is a set of files: .cert, .key (32-byte seed),
// .path (encoded chain of certificates up to the root) and .cert.txt.
struct CertFiles {
  pki::Certificate cert;
  crypto::SigningKey key;
  std::vector<pki::Certificate> path;  // this certificate first
};

Bytes encode_path(const std::vector<pki::Certificate>& path) {
  pki::CertChain c;
  c.path = path;
  return c.encode();
}

CertFiles load_cert(const std::string& stem) {
  CertFiles f;
  f.cert = pki::Certificate::decode(read_file(stem + ".cert"));
  f.key = crypto::SigningKey::from_seed(read_file(stem + ".key"));
  f.path = pki::CertChain::decode(read_file(stem + ".path")).path;
  return f;
}

void save_cert(const std::string& stem, const CertFiles& f) {
  write_file(stem + ".cert", f.cert.encode());
  write_file(stem + ".key", f.key.seed());
  write_file(stem + ".path", encode_path(f.path));
  write_text(stem + ".cert.txt", pki::dump(f.cert) + "\n");
}

void save_chain(const std::string& stem, const pki::CertChain& chain) {
  write_file(stem + ".chain", chain.encode());
  write_text(stem + ".chain.txt", pki::dump(chain) + "\n");
}

std::vector<Bytes> hex_list(const std::vector<std::string>& items) {
  std::vector<Bytes> out;
  for (const auto& h : items) out.push_back(from_hex(h));
  return out;
}

/// One hex sequence per line; blank lines and '#' comments skipped.
std::vector<Bytes> read_order(const std::string& path) {
  std::vector<Bytes> out;
  std::istringstream in(read_text(path));
  for (std::string line; std::getline(in, line);) {
    std::istringstream words(line);
    std::string w;
    if (!(words >> w) || w[0] == '#') continue;
    out.push_back(from_hex(w));
  }
  return out;
}

std::string join_hex(const std::vector<Bytes>& seqs) {
  std::string out;
  for (const auto& s : seqs) out += (out.empty() ? "" : ",") + to_hex(s);
  return out;
}

bool on_off(const std::string& v) { return v == "on"; }

// --- options shared by scenario commands ------------------------------------------

struct Common {
  std::uint64_t seed = 1;
  std::string backend = "prod";
  std::string out;
};

struct ScenarioFlags {
  std::string variant = "scep";
  std::string resumption = "off";
  std::string binding = "off";
  std::uint64_t rate_limit = 100;
  std::uint32_t threshold = 2;
  std::uint32_t keyservers = 3;
  std::string hazards;

  scenario::Config config(const Common& c) const {
    scenario::Config cfg;
    cfg.backend = group::parse_backend(c.backend);
    cfg.variant = scep::parse_variant(variant);
    cfg.resumption = on_off(resumption);
    cfg.bind_responses = on_off(binding);
    cfg.rate_limit = rate_limit;
    cfg.threshold = threshold;
    cfg.keyservers = keyservers;
    if (!hazards.empty()) cfg.hazards = screening::parse_hazard_file(read_text(hazards));
    return cfg;
  }
};

void add_common(CLI::App* app, Common& c, bool with_backend = true) {
  app->add_option("--seed", c.seed, "seed for every random choice")->capture_default_str();
  if (with_backend)
    app->add_option("--backend", c.backend, "group backend")->check(CLI::IsMember({"test", "prod"}))->capture_default_str();
  app->add_option("--out", c.out, "output path");
}

void add_scenario_flags(CLI::App* app, ScenarioFlags& f) {
  app->add_option("--scep-variant", f.variant)->check(CLI::IsMember({"scep", "scep-plus"}))->capture_default_str();
  app->add_option("--resumption", f.resumption)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  app->add_option("--bind-responses", f.binding)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  app->add_option("--rate-limit", f.rate_limit)->capture_default_str();
  app->add_option("--threshold", f.threshold)->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--keyservers", f.keyservers)->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--hazards", f.hazards, "hazard list file (hex,name,reason per line)");
}

std::string describe_verdict(const screening::Verdict& v) {
  std::string s(screening::verdict_name(v.kind));
  if (!v.hazard_name.empty()) s += " " + v.hazard_name;
  if (!v.reason.empty()) s += " (" + v.reason + ")";
  return s;
}

void print_outcome(std::ostream& out, const scenario::ScenarioRun& run) {
  const auto& o = run.outcome;
  out << "scenario: " << o.name << '\n';
  for (std::size_t i = 0; i < o.queries.size(); ++i) {
    const auto& q = o.queries[i];
    out << "query " << i + 1 << ":";
    if (q.response) {
      out << ' ' << screening::overall_name(q.response->overall) << '\n';
      for (std::size_t j = 0; j < q.order.size() && j < q.response->verdicts.size(); ++j) {
        const auto& v = q.response->verdicts[j];
        out << "  " << to_hex(q.order[j]) << "  " << describe_verdict(v) << '\n';
        if (v.kind == screening::VerdictKind::Hit)
          out << "  DENY: " << (v.hazard_name.empty() ? to_hex(q.order[j]) : v.hazard_name) << '\n';
      }
    } else {
      out << " error " << (q.detail.empty() ? std::string("-") : q.detail) << '\n';
    }
  }
  out << o.table();
  out << o.headline << '\n';
}

void write_transcript(const Common& c, const scenario::ScenarioRun& run, std::ostream& out) {
  if (c.out.empty()) return;
  write_text(c.out, run.transcript.to_jsonl());
  out << "transcript: " << c.out << " (" << run.transcript.records().size() << " records)\n";
}

// --- commands -------------------------------------------------------------------

int cmd_run(const std::string& mode, const Common& c, const ScenarioFlags& f, const std::string& order_file,
            const std::vector<std::string>& order_hex, const std::vector<std::string>& elt_hex, const std::string& code,
            const std::string& script_file, std::ostream& out) {
  const auto cfg = f.config(c);
  std::string script;
  if (mode == "script") {
    if (script_file.empty()) throw CLI::ValidationError("--script", "required for run script");
    script = read_text(script_file);
  } else {
    auto order = order_file.empty() ? std::vector<Bytes>{} : read_order(order_file);
    for (auto& s : hex_list(order_hex)) order.push_back(std::move(s));
    if (order.empty()) throw CLI::ValidationError("--order", "no sequences given");
    script = "connect\n";
    if (mode == "basic") {
      script += "query " + join_hex(order) + "\n";
    } else {
      script += "exempt-query " + join_hex(order) + " elt=" + join_hex(hex_list(elt_hex)) + " code=" + code + "\n";
    }
  }
  const auto run = scenario::run_scenario(cfg, script, c.seed, mode);
  print_outcome(out, run);
  write_transcript(c, run, out);
  bool ok = run.outcome.expected;
  for (const auto& q : run.outcome.queries) ok = ok && q.response.has_value();
  std::string token = run.outcome.headline;
  std::replace(token.begin(), token.end(), ' ', '_');
  out << "OUTCOME: " << token << '\n';
  return ok ? 0 : 1;
}

int cmd_attack(const std::string& which, const Common& c, const ScenarioFlags& f, bool distinct, std::ostream& out) {
  const auto cfg = f.config(c);
  scenario::ScenarioRun run;
  if (which == "mitm") run = scenario::attack_mitm(cfg, c.seed);
  if (which == "swap") run = scenario::attack_swap(cfg, c.seed);
  if (which == "passcode") run = scenario::attack_passcode(cfg, c.seed);
  if (which == "collision") run = scenario::attack_collision(cfg, c.seed, !distinct);
  print_outcome(out, run);
  write_transcript(c, run, out);
  out << (run.outcome.expected ? "expected for these flags\n" : "NOT the outcome expected for these flags\n");
  out << "OUTCOME: " << run.outcome.outcome << '\n';
  return run.outcome.expected ? 0 : 1;
}

int cmd_transcript_show(const std::string& path, const std::string& link, std::ostream& out) {
  const auto t = simnet::Transcript::from_jsonl(read_text(path));
  for (const auto& r : t.records()) {
    if (!link.empty() && r.link != link) continue;
    out << std::setw(5) << r.step << "  t=" << r.time << "  " << std::left << std::setw(8) << r.event << std::right;
    if (!r.link.empty()) out << "  " << r.link << "  " << r.from << " -> " << r.to;
    if (!r.label.empty()) out << "  [" << r.label << "]";
    if (!r.bytes.empty()) {
      const auto h = to_hex(r.bytes);
      out << "  " << r.bytes.size() << "B " << (h.size() > 24 ? h.substr(0, 24) + "..." : h);
    }
    out << '\n';
  }
  out << "OUTCOME: " << t.records().size() << "_RECORDS\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Desk-scale DNA synthesis screening stack and adversarial simulator", "sdna"};
  app.require_subcommand(1);
  int rc = 0;

  // pki
  auto* pki_cmd = app.add_subcommand("pki", "certificates, tokens, chains, revocation");
  pki_cmd->require_subcommand(1);
  Common pc;
  std::string type, name, email, issuer, level = "intermediate", synth_id = "synthesizer", device;
  std::uint64_t rate_limit = 100;
  std::uint32_t index = 1;
  std::vector<std::string> sequences;
  bool subtoken_key = false;
  pki::Timestamp not_before = pki::kAlways.start, not_after = pki::kAlways.end;
  pki::Timestamp now = scenario::kDefaultStart;
  std::string chain_path, root_path, revocations, parent, signer, cert_path;

  auto* create_root = pki_cmd->add_subcommand("create-root", "self-signed root certificate");
  add_common(create_root, pc, false);
  create_root->add_option("--type", type)->required()->check(CLI::IsMember({"manufacturer", "infrastructure", "exemption"}));
  create_root->add_option("--name", name)->required();
  create_root->add_option("--email", email);
  create_root->get_option("--out")->required();
  create_root->callback([&] {
    Rng rng = Rng(pc.seed).derive("create-root:" + pc.out);
    auto root = pki::create_root(pki::parse_cert_type(type), {name, email}, rng, {not_before, not_after});
    save_cert(pc.out, {root.cert, root.key, {root.cert}});
    out << pki::dump(root.cert) << '\n' << "OUTCOME: CREATED\n";
  });

  auto* issue_cert = pki_cmd->add_subcommand("issue-cert", "certificate one level below the issuer");
  add_common(issue_cert, pc, false);
  issue_cert->add_option("--issuer", issuer, "issuer file stem")->required();
  issue_cert->add_option("--name", name)->required();
  issue_cert->add_option("--email", email);
  issue_cert->add_option("--level", level)->check(CLI::IsMember({"intermediate", "leaf"}))->capture_default_str();
  issue_cert->add_option("--not-before", not_before);
  issue_cert->add_option("--not-after", not_after);
  issue_cert->get_option("--out")->required();
  issue_cert->callback([&] {
    Rng rng = Rng(pc.seed).derive("issue-cert:" + pc.out);
    const auto parent_files = load_cert(issuer);
    auto key = crypto::SigningKey::generate(rng);
    const auto lvl = level == "leaf" ? pki::Level::Leaf : pki::Level::Intermediate;
    auto cert = pki::issue_certificate(parent_files.cert, parent_files.key,
                                       {{name, email}, key.verify_key(), parent_files.cert.desc.type, lvl,
                                        {not_before, not_after}},
                                       rng);
    std::vector<pki::Certificate> path{cert};
    path.insert(path.end(), parent_files.path.begin(), parent_files.path.end());
    save_cert(pc.out, {cert, key, path});
    out << pki::dump(cert) << '\n' << "OUTCOME: ISSUED\n";
  });

  auto* issue_token = pki_cmd->add_subcommand("issue-token", "token issued by a leaf certificate");
  add_common(issue_token, pc, false);
  issue_token->add_option("--issuer", issuer, "leaf file stem")->required();
  issue_token->add_option("--type", type)->required()->check(CLI::IsMember({"synthesizer", "keyserver", "database", "exemption"}));
  issue_token->add_option("--synth-id", synth_id);
  issue_token->add_option("--rate-limit", rate_limit);
  issue_token->add_option("--index", index, "keyserver share index");
  issue_token->add_option("--sequences", sequences, "exempt sequences (hex)")->delimiter(',');
  issue_token->add_option("--device", device, "authenticator device id");
  issue_token->add_flag("--subtoken-key", subtoken_key, "also create a key for issuing sub-tokens");
  issue_token->add_option("--not-before", not_before);
  issue_token->add_option("--not-after", not_after);
  issue_token->get_option("--out")->required();
  issue_token->callback([&] {
    Rng rng = Rng(pc.seed).derive("issue-token:" + pc.out);
    const auto leaf = load_cert(issuer);
    auto key = crypto::SigningKey::generate(rng);
    pki::Payload payload;
    const auto t = pki::parse_token_type(type);
    std::optional<crypto::SigningKey> sub;
    switch (t) {
      case pki::TokenType::Synthesizer: payload = pki::SynthesizerPayload{synth_id, rate_limit}; break;
      case pki::TokenType::KeyserverInfra: payload = pki::KeyserverPayload{index}; break;
      case pki::TokenType::DatabaseInfra: payload = pki::DatabasePayload{}; break;
      case pki::TokenType::Exemption: {
        pki::ExemptionPayload e{hex_list(sequences), device, std::nullopt};
        if (subtoken_key) {
          sub = crypto::SigningKey::generate(rng);
          e.subtoken_key = sub->verify_key();
        }
        payload = std::move(e);
        break;
      }
    }
    auto token = pki::issue_token(leaf.cert, leaf.key, {payload, key.verify_key(), {not_before, not_after}, std::nullopt}, rng);
    save_chain(pc.out, {token, {}, leaf.path});
    write_file(pc.out + ".key", key.seed());
    if (sub) write_file(pc.out + ".subkey", sub->seed());
    out << pki::dump(token) << '\n' << "OUTCOME: ISSUED\n";
  });

  auto* issue_sub = pki_cmd->add_subcommand("issue-subtoken", "exemption sub-token over a subset of sequences");
  add_common(issue_sub, pc, false);
  issue_sub->add_option("--parent", parent, "parent chain stem")->required();
  issue_sub->add_option("--signer", signer, "sub-token key file (default <parent>.subkey)");
  issue_sub->add_option("--sequences", sequences)->delimiter(',')->required();
  issue_sub->add_flag("--subtoken-key", subtoken_key, "allow further sub-tokens");
  issue_sub->get_option("--out")->required();
  issue_sub->callback([&] {
    Rng rng = Rng(pc.seed).derive("issue-subtoken:" + pc.out);
    const auto chain = pki::CertChain::decode(read_file(parent + ".chain"));
    if (!chain.token) throw Error(Errc::Malformed, "parent chain has no token");
    const auto key = crypto::SigningKey::from_seed(read_file(signer.empty() ? parent + ".subkey" : signer));
    std::optional<crypto::SigningKey> next;
    if (subtoken_key) next = crypto::SigningKey::generate(rng);
    auto token = pki::issue_subtoken(*chain.token, key, hex_list(sequences), rng,
                                     next ? std::optional<crypto::VerifyKey>(next->verify_key()) : std::nullopt);
    pki::CertChain sub{token, {*chain.token}, chain.path};
    sub.parents.insert(sub.parents.end(), chain.parents.begin(), chain.parents.end());
    save_chain(pc.out, sub);
    if (next) write_file(pc.out + ".subkey", next->seed());
    out << pki::dump(token) << '\n' << "OUTCOME: ISSUED\n";
  });

  auto* validate = pki_cmd->add_subcommand("validate-chain", "check a chain against a trusted root");
  validate->add_option("--chain", chain_path, "chain file")->required();
  validate->add_option("--root", root_path, "trusted root certificate file")->required();
  validate->add_option("--revocations", revocations, "revocation list file");
  validate->add_option("--now", now, "validation time (unix seconds)")->capture_default_str();
  validate->callback([&] {
    const auto chain = pki::CertChain::decode(read_file(chain_path));
    const auto root = pki::Certificate::decode(read_file(root_path));
    pki::RevocationList revs;
    if (!revocations.empty()) revs = pki::RevocationList::decode(read_file(revocations));
    const auto res = pki::validate_chain(chain, root, now, revs);
    out << res.describe() << '\n';
    if (!res) {
      err << errc_name(res.code) << '\n';
      out << "OUTCOME: " << errc_name(res.code) << '\n';
      rc = 1;
      return;
    }
    out << "OUTCOME: VALID\n";
  });

  auto* revoke = pki_cmd->add_subcommand("revoke", "add a token id or certificate key to a revocation list");
  revoke->add_option("--list", revocations, "revocation list file (created if missing)")->required();
  revoke->add_option("--chain", chain_path, "revoke this chain's token id");
  revoke->add_option("--cert", cert_path, "revoke this certificate's subject key");
  revoke->callback([&] {
    pki::RevocationList revs;
    if (std::ifstream(revocations).good()) revs = pki::RevocationList::decode(read_file(revocations));
    if (chain_path.empty() == cert_path.empty()) throw CLI::ValidationError("revoke", "give exactly one of --chain, --cert");
    if (!chain_path.empty()) {
      const auto chain = pki::CertChain::decode(read_file(chain_path));
      if (!chain.token) throw Error(Errc::Malformed, "chain has no token");
      revs.sigmas.insert(chain.token->sigma);
    } else {
      revs.keys.insert(pki::Certificate::decode(read_file(cert_path)).subject_key);
    }
    write_file(revocations, revs.encode());
    out << "revoked ids: " << revs.sigmas.size() << ", keys: " << revs.keys.size() << '\n' << "OUTCOME: REVOKED\n";
  });

  // hdb
  auto* hdb_cmd = app.add_subcommand("hdb", "keyed hazard database");
  hdb_cmd->require_subcommand(1);
  Common hc;
  std::string hazard_file;
  auto* hdb_build = hdb_cmd->add_subcommand("build", "hash a hazard list under a key derived from --seed");
  add_common(hdb_build, hc);
  hdb_build->add_option("--hazards", hazard_file, "hex,name,reason per line")->required();
  hdb_build->get_option("--out")->required();
  hdb_build->callback([&] {
    const auto& g = group::group_for(group::parse_backend(hc.backend));
    Rng rng = Rng(hc.seed).derive("doprf-key");
    const auto k = g.random_nonzero_scalar(rng);
    const auto db = screening::build_hdb(g, screening::parse_hazard_file(read_text(hazard_file)), k);
    write_file(hc.out, db.encode());
    out << "entries: " << db.size() << '\n' << "OUTCOME: BUILT\n";
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "screen an order end to end on the simulated network");
  Common rc_common;
  ScenarioFlags rflags;
  std::string mode, order_file, code = "fresh", script_file;
  std::vector<std::string> order_hex, elt_hex;
  run_cmd->add_option("mode", mode, "basic | exemption | script")->required()->check(CLI::IsMember({"basic", "exemption", "script"}));
  add_common(run_cmd, rc_common);
  add_scenario_flags(run_cmd, rflags);
  run_cmd->add_option("--order-file", order_file, "one hex sequence per line");
  run_cmd->add_option("--order", order_hex, "hex sequences")->delimiter(',');
  run_cmd->add_option("--elt", elt_hex, "sequences listed in the exemption token (hex)")->delimiter(',');
  run_cmd->add_option("--code", code, "authenticator code to present")->check(CLI::IsMember({"fresh", "stale", "wrong"}))->capture_default_str();
  run_cmd->add_option("--script", script_file, "scenario script (run script)");
  run_cmd->callback([&] { rc = cmd_run(mode, rc_common, rflags, order_file, order_hex, elt_hex, code, script_file, out); });

  // attack
  auto* attack_cmd = app.add_subcommand("attack", "run one of the attack scenarios");
  Common ac;
  ScenarioFlags aflags;
  std::string which;
  bool distinct = false;
  attack_cmd->add_option("which", which, "mitm | swap | passcode | collision")->required()->check(CLI::IsMember({"mitm", "swap", "passcode", "collision"}));
  add_common(attack_cmd, ac);
  add_scenario_flags(attack_cmd, aflags);
  attack_cmd->add_flag("--distinct-ids", distinct, "collision: let the rogue token draw its own id");
  attack_cmd->callback([&] { rc = cmd_attack(which, ac, aflags, distinct, out); });

  // transcript
  auto* tr_cmd = app.add_subcommand("transcript", "inspect transcripts");
  tr_cmd->require_subcommand(1);
  std::string tr_in, tr_link;
  auto* tr_show = tr_cmd->add_subcommand("show", "print a transcript file");
  tr_show->add_option("--in", tr_in, "transcript file")->required();
  tr_show->add_option("--link", tr_link, "only this link, e.g. S->hdb#0");
  tr_show->callback([&] { rc = cmd_transcript_show(tr_in, tr_link, out); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << errc_name(e.code()) << '\n' << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << e.what() << '\n';
    return 2;
  }
  return rc;
}

}  // namespace sdna::cli
