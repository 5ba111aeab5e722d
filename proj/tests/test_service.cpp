#include "support.hpp"

#include "sleec/service.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

using namespace sleec;
using namespace sleec::testing;

namespace {

std::string temp_path(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sleec-svc-" + name);
  std::filesystem::remove(p);
  return p.string();
}

// Project for a sample document with candidates replayed from its fixture archive.
ProjectState sample_project(const std::string& name) {
  const std::string text = read_sample("samples/" + name + ".sleec");
  ProjectState p = new_project("samples/" + name + ".sleec", text);
  ReplayProvider replay(std::string(SLEEC_SOURCE_DIR) + "/samples/" + name + ".replay.jsonl");
  Signature sig = load_document(text).signature;
  set_candidates(p, sanitize(sig, replay), sig);
  return p;
}

nlohmann::json body(const httplib::Result& r) { return nlohmann::json::parse(r->body); }

class Running {
public:
  explicit Running(const std::string& project) : service(project) {
    service.mount(srv);
    port = srv.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~Running() {
    srv.stop();
    th.join();
  }

  httplib::Result post(const std::string& path, const nlohmann::json& j) {
    return client().Post(path, j.dump(), "application/json");
  }
  httplib::Result get(const std::string& path) { return client().Get(path); }

  httplib::Client client() {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(120, 0);
    return c;
  }

  Service service;
  httplib::Server srv;
  int port = 0;
  std::thread th;
};

}  // namespace

TEST(Project, CandidatesFromReplay) {
  ProjectState p = sample_project("forms");
  ASSERT_EQ(p.relations.size(), 4u);
  EXPECT_EQ(p.relations[3].text, "CreateForm hypernym ShowForm");
  EXPECT_FALSE(p.relations[3].filtered);
  EXPECT_FALSE(p.relations[0].justification.empty());
  EXPECT_THROW(set_verdict(p, "c4", "accept", ""), ProjectError);
  EXPECT_NO_THROW(set_verdict(p, "c4", "reject", "not a special case"));
  EXPECT_THROW(set_verdict(p, "c1", "maybe", ""), ProjectError);
}

TEST(Project, RoundTripBytes) {
  ProjectState p = sample_project("forms");
  set_verdict(p, "c1", "accept", "obvious");
  add_relation(p, "UserRequestsForm isContradictoryWith ShowForm", "added");
  p.history.push_back({1, p.revision, "2024-01-01T00:00:00Z", nlohmann::json::array({{{"verdict", "clean"}}})});
  const std::string path = temp_path("roundtrip.json");
  save_project(p, path);
  const std::string first = serialize(load_project(path));
  save_project(load_project(path), path);
  EXPECT_EQ(serialize(load_project(path)), first);
  EXPECT_EQ(first, serialize(p));
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}

TEST(Project, CorruptFile) {
  const std::string path = temp_path("corrupt.json");
  { std::ofstream(path) << "{\"document\": 3"; }
  EXPECT_THROW(load_project(path), ProjectError);
  { std::ofstream(path) << "{\"document\": {}}"; }
  EXPECT_THROW(load_project(path), ProjectError);
  EXPECT_THROW(Service{path}, ProjectError);
  std::filesystem::remove(path);
}

TEST(Project, StakeholderRelations) {
  ProjectState p = sample_project("battery");
  const auto& r = add_relation(p, "BatteryLow happensBefore SendUserWarning", "");
  EXPECT_EQ(r.id, "s1");
  EXPECT_EQ(r.verdict, "accept");
  EXPECT_THROW(add_relation(p, "BatteryLow happensBefore SendUserWarning", ""), ProjectError);
  EXPECT_THROW(add_relation(p, "BatteryLow happensBefore Nothing", ""), ParseError);
  // a fresh sanitize keeps stakeholder relations and surviving verdicts
  set_verdict(p, "c1", "accept", "kept");
  ReplayProvider replay(std::string(SLEEC_SOURCE_DIR) + "/samples/battery.replay.jsonl");
  Signature sig = p.document().signature;
  set_candidates(p, sanitize(sig, replay), sig);
  EXPECT_EQ(p.find("c1")->verdict, "accept");
  EXPECT_EQ(p.find("c1")->note, "kept");
  ASSERT_NE(p.find("s1"), nullptr);
}

TEST(Service, ReviewThenAnalyze) {
  const std::string path = temp_path("review.json");
  save_project(sample_project("battery"), path);
  Running svc(path);

  auto doc = svc.get("/document");
  ASSERT_TRUE(doc);
  EXPECT_EQ(doc->status, 200);
  EXPECT_NE(body(doc)["text"].get<std::string>().find("BatteryLow"), std::string::npos);

  auto rels = body(svc.get("/relations"))["relations"];
  ASSERT_EQ(rels.size(), 1u);
  EXPECT_EQ(rels[0]["relation"], "MuteNotifications isContradictoryWith SendUserWarning");

  auto v = svc.post("/relations/c1/verdict", {{"verdict", "accept"}, {"note", "cannot mute and warn"}});
  EXPECT_EQ(v->status, 200);
  EXPECT_EQ(body(v)["verdict"], "accept");

  const std::size_t before = svc.service.snapshot().history.size();
  auto a = svc.post("/analyze", {{"stage", 1}});
  ASSERT_EQ(a->status, 200);
  EXPECT_EQ(svc.service.snapshot().history.size(), before + 1);
  auto ds = body(a)["diagnoses"];
  ASSERT_EQ(ds.size(), 2u);
  for (const auto& d : ds) EXPECT_EQ(d["verdict"], "issueFound");

  // later stages are refused while stage 1 has issues
  for (int stage : {2, 4}) {
    auto r = svc.post("/analyze", {{"stage", stage}});
    EXPECT_EQ(r->status, 409);
    EXPECT_NE(body(r)["error"].get<std::string>().find("vacuous conflicts must be resolved before stage"), std::string::npos);
  }
  EXPECT_EQ(svc.post("/analyze", {{"stage", 7}})->status, 400);

  auto diag = body(svc.get("/diagnoses"));
  ASSERT_EQ(diag["stages"].size(), 1u);
  EXPECT_EQ(diag["stages"][0]["stage"], 1);

  // persisted file equals the exported project
  auto exported = svc.get("/project");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(exported->body, ss.str());

  // rejecting the relation changes the revision: stage 1 must run again
  EXPECT_EQ(svc.post("/relations/c1/verdict", {{"verdict", "reject"}})->status, 200);
  EXPECT_EQ(svc.post("/analyze", {{"stage", 2}})->status, 409);
  auto again = svc.post("/analyze", {{"stage", 1}});
  ASSERT_EQ(again->status, 200);
  for (const auto& d : body(again)["diagnoses"]) EXPECT_EQ(d["verdict"], "cleanUpToBound");
  EXPECT_EQ(svc.post("/analyze", {{"stage", 2}})->status, 200);
  EXPECT_EQ(svc.post("/analyze", {{"stage", 4}})->status, 409);  // stage 3 not yet run
  EXPECT_EQ(svc.post("/analyze", {{"stage", 3}})->status, 200);
  EXPECT_EQ(svc.post("/analyze", {{"stage", 4}})->status, 200);
  EXPECT_EQ(body(svc.get("/diagnoses"))["stages"].size(), 4u);
  std::filesystem::remove(path);
}

TEST(Service, ErrorsAndDocumentReplacement) {
  const std::string path = temp_path("errors.json");
  save_project(sample_project("forms"), path);
  Running svc(path);
  EXPECT_EQ(svc.post("/relations/c9/verdict", {{"verdict", "accept"}})->status, 404);
  EXPECT_EQ(svc.post("/relations/c4/verdict", {{"verdict", "accept"}})->status, 422);
  EXPECT_EQ(svc.client().Post("/relations/c1/verdict", "not json", "application/json")->status, 400);
  auto added = svc.post("/relations", {{"relation", "ShowForm isContradictoryWith UserRequestsForm"}});
  EXPECT_EQ(added->status, 201);
  EXPECT_EQ(body(added)["id"], "s1");
  EXPECT_EQ(svc.post("/relations", {{"relation", "ShowForm isContradictoryWith"}})->status, 422);

  const auto rev = svc.service.snapshot().revision;
  auto bad = svc.post("/document", {{"text", "rule_start\n R1 when Nope then ShowForm\nrule_end\n"}});
  EXPECT_EQ(bad->status, 400);
  EXPECT_TRUE(body(bad).contains("span"));
  EXPECT_EQ(svc.service.snapshot().revision, rev);

  std::string text = read_sample("samples/forms.sleec") + "// reviewed\n";
  auto ok = svc.post("/document", {{"text", text}});
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(svc.service.snapshot().document_text, text);
  EXPECT_GT(svc.service.snapshot().revision, rev);
  std::filesystem::remove(path);
}

TEST(Service, ConcurrentVerdicts) {
  const std::string path = temp_path("concurrent.json");
  save_project(sample_project("forms"), path);
  {
    Running svc(path);
    std::vector<std::thread> ts;
    for (const char* id : {"c1", "c2", "c3"})
      ts.emplace_back([&svc, id] { svc.post(std::string("/relations/") + id + "/verdict", {{"verdict", "accept"}, {"note", id}}); });
    for (auto& t : ts) t.join();
  }
  ProjectState p = load_project(path);
  for (const char* id : {"c1", "c2", "c3"}) {
    EXPECT_EQ(p.find(id)->verdict, "accept");
    EXPECT_EQ(p.find(id)->note, id);
  }
  std::filesystem::remove(path);
}
