#include "qxot/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace qxot::io {

namespace {

Json bits(const Bits& b) { return Json(b); }

Json pair(xot::BitPair p) { return Json::array({p[0], p[1]}); }

Json form(const qc::LinearForm& f) { return {{"coeffs", f.coeffs}, {"constant", f.constant}}; }

Json transcript(const std::vector<xot::Message>& messages) {
  Json out = Json::array();
  for (const auto& m : messages) out.push_back(to_json(m));
  return out;
}

Json alice_keys(const xot::AliceKeys& k) {
  return {{"s1", k.s1}, {"s2", k.s2}, {"s3", k.s3}, {"effective_x", pair(k.effective_x)}};
}

}  // namespace

double round_real(double v) { return std::stod(leakage::format_real(v)); }

Json to_json(const xot::Message& m) {
  return {{"dir", m.dir == xot::Direction::AliceToBob ? "A->B" : "B->A"},
          {"kind", m.kind},
          {"label", m.label},
          {"payload", m.payload}};
}

Json to_json(const xot::XotRun& run) {
  return {{"variant", xot::variant_name(run.variant)},
          {"seed", run.seed},
          {"alice", {{"x", pair(run.inputs.x)}, {"keys", alice_keys(run.alice)}}},
          {"bob", {{"y", pair(run.inputs.y)}, {"keys", {{"k0", run.bob.k0}, {"k1", run.bob.k1}}}}},
          {"decoded_qubits", pair(run.pick.qubits)},
          {"messages", transcript(run.transcript)},
          {"output", run.output}};
}

Json to_json(const linear::P3Run& run) {
  Json keys = Json::array();
  for (const auto& k : run.alice.keys) keys.push_back(alice_keys(k));
  Json j{{"variant", xot::variant_name(run.variant)},
         {"seed", run.seed},
         {"n", run.inputs.n()},
         {"alice", {{"x", bits(run.inputs.x)}, {"keys", keys}}},
         {"bob", {{"y", bits(run.inputs.y)}, {"keys", {{"k0", run.bob.k0}, {"k1", bits(run.bob.k1)}}}}},
         {"parity_certificate", run.alice.parity_certificate},
         {"outcomes", bits(run.outcomes)},
         {"R0", run.R0},
         {"S2", run.S2},
         {"he_used", run.he_used},
         {"messages", transcript(run.transcript)},
         {"output", run.output}};
  if (run.he) {
    Json cts = Json::array();
    for (const auto& c : run.he->outcome_ciphertexts) cts.push_back(c.value.get_str());
    j["he"] = {{"scheme", run.he->scheme},
               {"modulus", run.he->folded.modulus.get_str()},
               {"outcome_ciphertexts", cts},
               {"folded", run.he->folded.value.get_str()},
               {"mask", run.he->mask},
               {"masked_parity", run.he->masked_parity}};
  }
  return j;
}

Json to_json(const adversaries::AttackResult& r) {
  Json guess = Json::array(), success = Json::array();
  for (int y = 0; y < 4; ++y) {
    Json g = Json::array(), s = Json::array();
    for (int i = 0; i < 4; ++i) {
      g.push_back(round_real(r.guess[y][i]));
      s.push_back(round_real(r.success[y][i]));
    }
    guess.push_back(g);
    success.push_back(s);
  }
  return {{"target", adversaries::target_name(r.config.target)},
          {"variant", xot::variant_name(r.config.variant)},
          {"coherent_keys", r.config.coherent_keys},
          {"entangle_third", r.config.entangle_third},
          {"guess", guess},
          {"success_by_k", success},
          {"average_success", round_real(r.average_success)},
          {"sample",
           {{"seed", r.seed},
            {"y", pair(r.sample_y)},
            {"k0", r.sample_keys.k0},
            {"k1", r.sample_keys.k1},
            {"guess", pair({r.sample_guess >> 1, r.sample_guess & 1})},
            {"messages", transcript(r.transcript)}}}};
}

Json to_json(const leakage::LeakageReport& r) {
  Json strategies = Json::object();
  for (const auto& [name, v] : r.strategy_bits) strategies[name] = round_real(v);
  return {{"scenario", r.scenario},
          {"n", r.n},
          {"prior", r.prior},
          {"strategy_bits", strategies},
          {"holevo_bits", round_real(r.holevo_bits)},
          {"entropy_of_secret", round_real(r.entropy_of_secret)},
          {"notes", r.notes}};
}

Json to_json(const qc::RunLog& log) {
  Json teleports = Json::array();
  for (const auto& t : log.teleports) {
    Json e{{"stage", t.stage}, {"qubit", t.qubit}, {"dir", t.dir == xot::Direction::AliceToBob ? "A->B" : "B->A"},
           {"a", t.a}, {"b", t.b}};
    if (t.x_variable >= 0) e["variables"] = {t.x_variable, t.z_variable};
    teleports.push_back(e);
  }
  Json corrections = Json::array();
  for (const auto& c : log.corrections) {
    corrections.push_back({{"stage", c.stage},
                           {"qubit", c.qubit},
                           {"form", form(c.form)},
                           {"output", c.output},
                           {"shadow", c.shadow},
                           {"protocol3", to_json(c.run)}});
  }
  Json frame = Json::array();
  for (int q = 0; q < log.final_frame.num_qubits(); ++q) {
    frame.push_back({{"qubit", q},
                     {"x", form(log.final_frame.x_form[static_cast<std::size_t>(q)])},
                     {"z", form(log.final_frame.z_form[static_cast<std::size_t>(q)])}});
  }
  return {{"seed", log.seed},
          {"protocol3_variant", xot::variant_name(log.options.variant)},
          {"batch", log.options.batch},
          {"teleports", teleports},
          {"corrections", corrections},
          {"messages", transcript(log.messages)},
          {"final_frame", frame},
          {"alice_values", log.alice_values},
          {"warnings", log.warnings},
          {"fidelity", round_real(log.fidelity)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

}  // namespace qxot::io
