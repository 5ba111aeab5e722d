// sleec: command-line front end for parsing, normalising, sanitizing and checking SLEEC documents.

#include "sleec/http_provider.hpp"
#include "sleec/normalize.hpp"
#include "sleec/parser.hpp"
#include "sleec/project.hpp"
#include "sleec/sanitize.hpp"
#include "sleec/service.hpp"
#include "sleec/wfi.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sleec;

namespace {

constexpr int kClean = 0;
constexpr int kError = 1;
constexpr int kIssues = 2;
constexpr int kInconclusive = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw UsageError("cannot write '" + path + "'");
}

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

// Provider chosen from the environment: replay archive, scripted table, or live endpoint.
// SLEEC_RECORD_ARCHIVE wraps whichever one is chosen.
class ProviderStack {
public:
  ProviderStack() {
    if (auto replay = env("SLEEC_REPLAY_ARCHIVE"); !replay.empty()) {
      base_ = std::make_unique<ReplayProvider>(replay);
    } else if (auto script = env("SLEEC_PROVIDER_SCRIPT"); !script.empty()) {
      nlohmann::json j = nlohmann::json::parse(read_file(script), nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw UsageError("SLEEC_PROVIDER_SCRIPT: '" + script + "' is not a JSON object");
      base_ = std::make_unique<ScriptedProvider>(ScriptedProvider::from_json(j));
    } else if (auto url = env("SLEEC_PROVIDER_URL"); !url.empty()) {
      if (env("SLEEC_PROVIDER_MODEL").empty()) throw UsageError("SLEEC_PROVIDER_URL is set but SLEEC_PROVIDER_MODEL is not");
      base_ = std::make_unique<HttpProvider>(HttpProviderConfig{url, env("SLEEC_PROVIDER_KEY"), env("SLEEC_PROVIDER_MODEL")});
    } else {
      throw UsageError(
          "no model provider configured. Set one of:\n"
          "  SLEEC_REPLAY_ARCHIVE=<archive.jsonl>   replay recorded answers\n"
          "  SLEEC_PROVIDER_SCRIPT=<table.json>     answer from a verdict table\n"
          "  SLEEC_PROVIDER_URL=<chat endpoint>     live model (with SLEEC_PROVIDER_MODEL, SLEEC_PROVIDER_KEY)\n"
          "and optionally SLEEC_RECORD_ARCHIVE=<archive.jsonl> to record the exchanges");
    }
    if (auto rec = env("SLEEC_RECORD_ARCHIVE"); !rec.empty()) recorder_ = std::make_unique<RecordingProvider>(*base_, rec);
  }

  Provider& get() { return recorder_ ? static_cast<Provider&>(*recorder_) : *base_; }

private:
  std::unique_ptr<Provider> base_;
  std::unique_ptr<RecordingProvider> recorder_;
};

Bound parse_bound(const std::string& s) {
  Bound b;
  if (s.empty()) return b;
  try {
    std::size_t used = 0;
    const auto comma = s.find(',');
    b.max_states = std::stoul(s.substr(0, comma), &used);
    if (used != s.substr(0, comma).size()) throw std::invalid_argument(s);
    if (comma != std::string::npos) {
      b.horizon = std::stoll(s.substr(comma + 1), &used);
      if (used != s.size() - comma - 1 || b.horizon < 0) throw std::invalid_argument(s);
    }
  } catch (const std::logic_error&) {
    throw UsageError("--bound expects K or K,T with integers (states, horizon in seconds), got '" + s + "'");
  }
  return b;
}

int parse_cmd(const std::string& file, const std::string& format) {
  SurfaceDocument doc = parse(read_file(file));
  NormalizedDocument norm = normalize(doc);
  if (format == "machine") {
    nlohmann::json j;
    j["events"] = std::vector<std::string>(doc.signature.events.begin(), doc.signature.events.end());
    j["measures"] = nlohmann::json::object();
    for (const auto& [m, s] : doc.signature.measures) j["measures"][m] = s == MeasureSort::boolean ? "boolean" : "numeric";
    j["constants"] = doc.signature.constants;
    j["rules"] = nlohmann::json::array();
    for (const auto& r : doc.rules) j["rules"].push_back({{"id", r.id}, {"span", span_json(r.span)}, {"defeaters", r.defeaters.size()}});
    j["facts"] = nlohmann::json::array();
    for (const auto& f : doc.facts) j["facts"].push_back({{"id", f.id}, {"span", span_json(f.span)}});
    j["relations"] = nlohmann::json::array();
    for (const auto& r : doc.relations) j["relations"].push_back(render(r, &doc.signature));
    j["normalizedRules"] = norm.rules.size();
    std::cout << j.dump(2) << "\n";
    return kClean;
  }
  std::cout << file << ": " << doc.signature.events.size() << " events, " << doc.signature.measures.size() << " measures, "
            << doc.rules.size() << " rules (" << norm.rules.size() << " after normalisation), " << doc.relations.size()
            << " relations, " << doc.facts.size() << " facts\n";
  for (const auto& r : doc.rules)
    std::cout << "  rule " << r.id << "  bytes " << r.span.begin << ".." << r.span.end
              << (r.defeaters.empty() ? "" : "  defeaters " + std::to_string(r.defeaters.size())) << "\n";
  for (const auto& f : doc.facts) std::cout << "  fact " << f.id << "  bytes " << f.span.begin << ".." << f.span.end << "\n";
  return kClean;
}

int normalize_cmd(const std::string& file) {
  std::cout << render(load_document(read_file(file)));
  return kClean;
}

struct SanitizeOpts {
  std::string file, out, relations, project;
  std::size_t jobs = 1;
};

int sanitize_cmd(const SanitizeOpts& o) {
  const std::string text = read_file(o.file);
  NormalizedDocument doc = load_document(text);
  ProviderStack providers;
  SanitizeReport rep = sanitize(doc.signature, providers.get(), o.jobs);
  const std::string report = to_json(rep, doc.signature).dump(2) + "\n";
  if (o.out.empty()) std::cout << report;
  else write_file(o.out, report);
  if (!o.relations.empty()) write_file(o.relations, accepted_block(rep, doc.signature));
  if (!o.project.empty()) {
    ProjectState p = std::filesystem::exists(o.project) ? load_project(o.project) : new_project(o.file, text);
    set_candidates(p, rep, doc.signature);
    save_project(p, o.project);
  }
  if (!rep.filter.complete)
    std::cerr << "warning: " << rep.filter.unanswered.size() << " follow-up queries went unanswered\n";
  return kClean;
}

struct CheckOpts {
  std::string file, kind, subject, bound, format = "text";
  bool force = false;
};

int check_cmd(const CheckOpts& o) {
  NormalizedDocument doc = load_document(read_file(o.file));
  WfiContext ctx{doc, doc.relations, parse_bound(o.bound), {}};
  std::vector<Diagnosis> ds;
  nlohmann::json meta;
  if (!o.kind.empty()) {
    auto kind = wfi_kind_from_cli(o.kind);
    if (!kind) throw UsageError("unknown --kind '" + o.kind + "'");
    std::vector<std::string> subjects;
    if (!o.subject.empty()) subjects.push_back(o.subject);
    else if (*kind == WfiKind::insufficiency || *kind == WfiKind::over_restrictiveness) {
      const FactRole role = *kind == WfiKind::insufficiency ? FactRole::concern : FactRole::purpose;
      for (const auto& f : doc.facts)
        if (f.role == role) subjects.push_back(f.id);
    } else {
      for (const auto& r : doc.rules) subjects.push_back(r.id);
    }
    for (const auto& s : subjects) ds.push_back(check(ctx, *kind, s));
  } else {
    if (!o.subject.empty()) throw UsageError("--subject needs --kind");
    PlanResult plan = run_plan(ctx, o.force);
    ds = std::move(plan.diagnoses);
    meta["stagesRun"] = plan.stages_run;
    meta["blockedAfter"] = plan.blocked_after ? nlohmann::json(*plan.blocked_after) : nlohmann::json(nullptr);
  }
  int code = kClean;
  for (const auto& d : ds) {
    if (d.verdict == WfiVerdict::issue_found) code = kIssues;
    else if (d.verdict == WfiVerdict::unknown && code == kClean) code = kInconclusive;
  }
  if (o.format == "machine") {
    nlohmann::json j = meta;
    j["diagnoses"] = nlohmann::json::array();
    for (const auto& d : ds) j["diagnoses"].push_back(to_json(d));
    j["exitCode"] = code;
    std::cout << j.dump(2) << "\n";
    return code;
  }
  for (const auto& d : ds) std::cout << render(d) << "\n";
  std::size_t issues = 0;
  for (const auto& d : ds) issues += d.verdict == WfiVerdict::issue_found;
  std::cout << ds.size() << " checks, " << issues << " issues\n";
  if (meta.contains("blockedAfter") && !meta["blockedAfter"].is_null())
    std::cout << "stopped after stage " << meta["blockedAfter"].get<int>()
              << ": resolve these issues before the later stages (--force runs them anyway)\n";
  return code;
}

struct ServeOpts {
  std::string project, document, host = "127.0.0.1";
  int port = 8080;
};

int serve_cmd(const ServeOpts& o) {
  if (!std::filesystem::exists(o.project)) {
    if (o.document.empty()) throw UsageError("project '" + o.project + "' does not exist; pass --document to create it");
    save_project(new_project(o.document, read_file(o.document)), o.project);
  }
  Service service(o.project);
  httplib::Server srv;
  service.mount(srv);
  if (!srv.bind_to_port(o.host, o.port)) throw UsageError("cannot listen on " + o.host + ":" + std::to_string(o.port));
  std::cerr << "serving " << o.project << " on http://" << o.host << ":" << o.port << "\n";
  srv.listen_after_bind();
  return kClean;
}

void report_parse_error(const std::string& file, const ParseError& e) {
  std::cerr << file << ": " << e.what() << " [bytes " << e.span().begin << ".." << e.span().end << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLEEC normative requirements toolkit"};
  app.require_subcommand(1);

  std::string file, format = "text";
  auto* parse_sc = app.add_subcommand("parse", "Parse a document and list its rules and facts");
  parse_sc->add_option("file", file, "SLEEC document")->required();
  parse_sc->add_option("--format", format, "text or machine")->check(CLI::IsMember({"text", "machine"}));

  auto* norm_sc = app.add_subcommand("normalize", "Print the normalised document");
  norm_sc->add_option("file", file, "SLEEC document")->required();

  SanitizeOpts so;
  auto* san_sc = app.add_subcommand("sanitize", "Extract candidate relations and filter them for consistency");
  san_sc->add_option("file", so.file, "SLEEC document")->required();
  san_sc->add_option("--out", so.out, "write the report here instead of stdout");
  san_sc->add_option("--relations", so.relations, "write the accepted relations as a relation block");
  san_sc->add_option("--project", so.project, "store the candidates in this review project");
  san_sc->add_option("--jobs", so.jobs, "provider calls in flight")->check(CLI::PositiveNumber);
  san_sc->footer("Provider selection uses SLEEC_REPLAY_ARCHIVE, SLEEC_PROVIDER_SCRIPT or SLEEC_PROVIDER_URL;\n"
                 "SLEEC_RECORD_ARCHIVE records every exchange.");

  CheckOpts co;
  auto* check_sc = app.add_subcommand("check", "Look for well-formedness issues");
  check_sc->add_option("file", co.file, "SLEEC document")->required();
  check_sc->add_option("--kind", co.kind, "vacuous, situational, redundancy, insufficiency or restrictiveness")
      ->check(CLI::IsMember({"vacuous", "situational", "redundancy", "insufficiency", "restrictiveness"}));
  check_sc->add_option("--subject", co.subject, "rule or fact id (with --kind)");
  check_sc->add_option("--bound", co.bound, "K or K,T: at most K states, timestamps up to T seconds");
  check_sc->add_option("--format", co.format, "text or machine")->check(CLI::IsMember({"text", "machine"}));
  check_sc->add_flag("--force", co.force, "run later stages even when earlier ones report issues");

  ServeOpts vo;
  auto* serve_sc = app.add_subcommand("serve", "Serve a review project over HTTP");
  serve_sc->add_option("--project", vo.project, "project file")->required();
  serve_sc->add_option("--document", vo.document, "create the project from this document when missing");
  serve_sc->add_option("--port", vo.port, "port")->check(CLI::Range(1, 65535));
  serve_sc->add_option("--host", vo.host, "interface to bind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kClean : kError;
  }

  const std::string& doc_file = !file.empty() ? file : !so.file.empty() ? so.file : co.file;
  try {
    if (*parse_sc) return parse_cmd(file, format);
    if (*norm_sc) return normalize_cmd(file);
    if (*san_sc) return sanitize_cmd(so);
    if (*check_sc) return check_cmd(co);
    if (*serve_sc) return serve_cmd(vo);
  } catch (const ParseError& e) {
    report_parse_error(doc_file, e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kError;
}
