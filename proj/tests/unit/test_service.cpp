#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "moleda/docstore/store.hpp"
#include "moleda/embed/spectral.hpp"
#include "moleda/error.hpp"
#include "moleda/service/session.hpp"
#include "oracles/fixtures.hpp"
#include "oracles/tsv.hpp"

using namespace moleda;
using namespace moleda::service;

namespace {

std::vector<docstore::Document> molecules(std::size_t n) {
    docstore::Store store;
    std::ifstream in(moleda::testing::data_path("molecules_300.csv"));
    store.ingest(in, docstore::Format::Csv, "m");
    return store.fetch("m", docstore::Filter::all(), {}, docstore::Limit::first(n));
}

template <class F>
std::string error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

/// Collects tasks so that tests decide when the solver worker runs.
struct ManualExecutor {
    std::vector<std::function<void()>> tasks;
    Executor executor() {
        return [this](std::function<void()> t) { tasks.push_back(std::move(t)); };
    }
    void run() {
        while (!tasks.empty()) {
            auto t = std::move(tasks.front());
            tasks.erase(tasks.begin());
            t();
        }
    }
};

Executor inline_executor() {
    return [](std::function<void()> t) { t(); };
}

embed::Coords coords_of(const json& event) {
    embed::Coords c(static_cast<Eigen::Index>(event["coords"].size()), 2);
    for (std::size_t i = 0; i < event["coords"].size(); ++i) {
        c(static_cast<Eigen::Index>(i), 0) = event["coords"][i][0].get<double>();
        c(static_cast<Eigen::Index>(i), 1) = event["coords"][i][1].get<double>();
    }
    return c;
}

Interaction move(std::size_t index, double x, double y) {
    Interaction m;
    m.type = Interaction::Type::MoveControl;
    m.index = index;
    m.x = x;
    m.y = y;
    return m;
}

std::shared_ptr<Session> ready_session(SessionManager& mgr, std::size_t n, const json& embed_body) {
    auto s = mgr.create("m", molecules(n));
    s->fingerprint({{"method", "hashed_path"}, {"params", {{"n_bits", 512}}}});
    s->embed(embed_body);
    return s;
}

}  // namespace

TEST(Codec, ConstraintsRoundTrip) {
    embed::ConstraintSet c;
    c.control_points = {{3, 0.5, -0.2}, {7, 0.0, 1.0}};
    c.must_links = {{1, 2}};
    c.cannot_links = {{4, 5}, {6, 8}};
    c.mu_cp = 10;
    c.mu_ml = 0.5;
    c.mu_cl = 2;
    c.lambda = 1e-4;
    const json j = to_json(c);
    EXPECT_EQ(j["must_links"], json::parse("[[1,2]]"));
    EXPECT_EQ(j["control_points"][0], json::parse(R"({"index":3,"x":0.5,"y":-0.2})"));
    EXPECT_EQ(constraints_from_json(j), c);
    EXPECT_EQ(constraints_from_json(json::parse(j.dump())), c);
    EXPECT_EQ(constraints_from_json(json::object()), embed::ConstraintSet{});
    EXPECT_EQ(error_code([] { constraints_from_json(json::parse(R"({"mu":1})")); }), "invalid_constraint");
    EXPECT_EQ(error_code([] { constraints_from_json(json::parse(R"({"must_links":[[1]]})")); }), "invalid_constraint");
    EXPECT_EQ(error_code([] { constraints_from_json(json::parse(R"({"control_points":[{"index":-1,"x":0,"y":0}]})")); }),
              "invalid_constraint");
}

TEST(Codec, CoordsCsvIsRoundTripPrecise) {
    embed::Coords c(2, 2);
    c << 0.1, -1.0 / 3.0, 1e-300, 2.0;
    std::ostringstream out;
    write_coords_csv(out, {"a", "b,c"}, c);
    EXPECT_EQ(out.str(), "id,x,y\na,0.10000000000000001,-0.33333333333333331\n\"b,c\",1e-300,2\n");
}

TEST(Pipeline, FingerprintFailuresAreZeroRowsNotDrops) {
    std::vector<docstore::Document> docs = molecules(5);
    docs[2].fields["smiles"] = std::string("C1CC");
    docs[4].fields["smiles"] = std::string("");
    const FingerprintSet set = fingerprint_documents(docs, {});
    ASSERT_EQ(set.size(), 5u);
    ASSERT_EQ(set.failures.size(), 2u);
    EXPECT_EQ(set.failures[0].index, 2u);
    EXPECT_EQ(set.failures[0].code, "unclosed_ring");
    EXPECT_EQ(set.failures[1].index, 4u);
    EXPECT_TRUE(set.fps[2].bits.empty());
    EXPECT_EQ(set.fps[2].n_bits, 2048u);
    EXPECT_FALSE(set.fps[1].bits.empty());
    const json stats = fingerprint_stats_json(set);
    EXPECT_EQ(stats["dimension"], 2048);
    EXPECT_EQ(stats["density"]["min"], 0.0);
    EXPECT_EQ(stats["failures"].size(), 2u);

    std::stringstream io;
    write_fingerprints_jsonl(io, set);
    const FingerprintSet back = read_fingerprints_jsonl(io);
    EXPECT_EQ(back.fps, set.fps);
    EXPECT_EQ(back.ids, set.ids);
    EXPECT_EQ(back.smiles, set.smiles);
    ASSERT_EQ(back.failures.size(), 2u);
    EXPECT_EQ(back.failures[1].index, 4u);
}

TEST(Pipeline, WholeFixtureParses) {
    const auto docs = molecules(300);
    ASSERT_EQ(docs.size(), 300u);
    for (auto method : {fingerprint::Method::HashedPath, fingerprint::Method::AtmoKeys}) {
        FingerprintRequest req;
        req.method = method;
        EXPECT_TRUE(fingerprint_documents(docs, req).failures.empty());
    }
}

TEST(Pipeline, FingerprintRequestValidation) {
    EXPECT_EQ(fingerprint_request_from_json(json::parse(R"({"method":"atmo_keys"})")).method, fingerprint::Method::AtmoKeys);
    EXPECT_EQ(fingerprint_request_from_json(json::parse(R"({"params":{"n_bits":1024,"max_len":5}})")).path.n_bits, 1024u);
    EXPECT_EQ(error_code([] { fingerprint_request_from_json(json::parse(R"({"params":{"n_bits":1000}})")); }),
              "invalid_path_config");
    EXPECT_EQ(error_code([] { fingerprint_request_from_json(json::parse(R"({"method":"ecfp"})")); }),
              "unknown_fingerprint_method");
}

TEST(Pipeline, FingerprintJsonlRejectsMalformedLines) {
    std::istringstream a("{\"id\":\"x\",\"method\":\"hashed_path\",\"n_bits\":64,\"bits\":[70]}\n");
    EXPECT_EQ(error_code([&] { read_fingerprints_jsonl(a); }), "invalid_fingerprints");
    std::istringstream b("not json\n");
    EXPECT_EQ(error_code([&] { read_fingerprints_jsonl(b); }), "invalid_fingerprints");
    std::istringstream c(
        "{\"method\":\"hashed_path\",\"n_bits\":64,\"bits\":[1]}\n{\"method\":\"hashed_path\",\"n_bits\":128,\"bits\":[1]}\n");
    EXPECT_EQ(error_code([&] { read_fingerprints_jsonl(c); }), "invalid_fingerprints");
}

TEST(Pipeline, ClusterRequestsAndErrors) {
    const Eigen::MatrixXd x = moleda::testing::random_normal(12, 3, 1);
    const ClusterRequest req = cluster_request_from_json(json::parse(R"({"algo":"kmeans","k":3,"seed":5})"));
    const ClusterResult r = run_cluster(x, req);
    EXPECT_EQ(r.clustering.labels.size(), 12u);
    ASSERT_TRUE(r.validity);
    const json j = to_json(r, req);
    EXPECT_EQ(j["labels"].size(), 12u);
    EXPECT_EQ(j["seed"], 5);
    EXPECT_FALSE(run_cluster(x, cluster_request_from_json(json::parse(R"({"k":1})"))).validity);
    EXPECT_EQ(error_code([&] { run_cluster(x, cluster_request_from_json(json::parse(R"({"k":13})"))); }), "k_too_large");
    EXPECT_EQ(error_code([] { cluster_request_from_json(json::parse(R"({"algo":"birch","k":2})")); }), "unknown_algo");
    EXPECT_EQ(error_code([] { cluster_request_from_json(json::parse(R"({"k":2,"linkage":"centroid"})")); }),
              "unknown_linkage");
    EXPECT_EQ(error_code([] { cluster_request_from_json(json::object()); }), "invalid_k");
}

TEST(Pipeline, CkpcaWithoutConstraintsEqualsKpca) {
    const auto set = fingerprint_documents(molecules(80), {});
    const Eigen::MatrixXd x = dense_bits(set);
    for (const char* kernel : {"rbf", "tanimoto"}) {
        const auto a = run_embed(x, embed_request_from_json({{"method", "kpca"}, {"kernel", kernel}}));
        const auto b = run_embed(x, embed_request_from_json({{"method", "ckpca"}, {"kernel", kernel}}));
        EXPECT_LT((a.embedding.coords - b.embedding.coords).cwiseAbs().maxCoeff(), 1e-8) << kernel;
        EXPECT_NEAR(embed::diameter(a.embedding.coords), 2.0, 1e-12);
        ASSERT_TRUE(a.quality);
        EXPECT_EQ(a.quality->k_used, 10);
        EXPECT_TRUE(b.state);
    }
}

TEST(Pipeline, EveryMethodRuns) {
    const auto set = fingerprint_documents(molecules(40), {});
    const Eigen::MatrixXd x = dense_bits(set);
    json controls = json::array();
    for (int i = 0; i < 5; ++i) controls.push_back({{"index", i * 7}, {"x", i * 0.3 - 0.6}, {"y", (i % 2) * 0.5}});
    for (const char* m : {"pca", "kpca", "ckpca", "tsne", "lsp"}) {
        json body = {{"method", m}, {"params", {{"perplexity", 5}, {"iters", 300}, {"k_neighbors", 5}, {"quality_k", 4}}}};
        body["constraints"] = {{"control_points", controls}};
        const auto r = run_embed(x, embed_request_from_json(body));
        EXPECT_EQ(r.embedding.coords.rows(), 40) << m;
        EXPECT_TRUE(r.embedding.coords.allFinite()) << m;
        ASSERT_TRUE(r.quality);
        EXPECT_EQ(r.quality->k_used, 4);
    }
    EXPECT_EQ(error_code([&] { run_embed(x, embed_request_from_json({{"method", "lsp"}})); }), "too_few_controls");
    EXPECT_EQ(error_code([&] { embed_request_from_json({{"method", "umap"}}); }), "unknown_embed_method");
    EXPECT_EQ(error_code([&] { embed_request_from_json({{"kernel", "poly"}}); }), "unknown_kernel");
}

TEST(Mailbox, CoalescesMovesLatestWins) {
    Mailbox box;
    for (int t = 0; t < 100; ++t) box.push(move(3, t * 0.01, -t * 0.01));
    box.push(move(4, 1, 1));
    ASSERT_EQ(box.size(), 2u);
    const auto first = box.pop();
    EXPECT_EQ(first->index, 3u);
    EXPECT_EQ(first->x, 0.99);
    EXPECT_EQ(first->y, -0.99);
}

TEST(Mailbox, TopologyChangesAreBarriers) {
    Mailbox box;
    box.push(move(3, 0, 0));
    Interaction remove;
    remove.type = Interaction::Type::RemoveControl;
    remove.index = 3;
    box.push(remove);
    box.push(move(3, 1, 1));
    box.push(move(3, 2, 2));
    ASSERT_EQ(box.size(), 3u);
    EXPECT_EQ(box.pop()->x, 0.0);
    EXPECT_EQ(box.pop()->type, Interaction::Type::RemoveControl);
    EXPECT_EQ(box.pop()->x, 2.0);
}

TEST(Interaction, JsonRoundTripAndValidation) {
    for (const char* text : {R"({"type":"add_control","index":3,"x":0.5,"y":-0.2})", R"({"type":"remove_control","index":1})",
                             R"({"type":"add_link","kind":"cannot","i":1,"j":2})",
                             R"({"type":"set_strength","target":"must","value":0})"}) {
        const json j = json::parse(text);
        EXPECT_EQ(to_json(interaction_from_json(j)), j);
    }
    for (const char* text : {R"({"type":"drag"})", R"({"type":"move_control","index":-1,"x":0,"y":0})",
                             R"({"type":"add_link","kind":"control","i":1,"j":2})", R"({"type":"set_strength","value":1})",
                             R"([1])"}) {
        EXPECT_EQ(error_code([&] { interaction_from_json(json::parse(text)); }), "invalid_message") << text;
    }
}

TEST(Session, RequiresFingerprintsFirst) {
    SessionManager mgr(inline_executor());
    auto s = mgr.create("m", molecules(20));
    EXPECT_EQ(error_code([&] { s->cluster({{"k", 2}}); }), "fingerprints_missing");
    EXPECT_EQ(error_code([&] { s->embed({{"method", "kpca"}}); }), "fingerprints_missing");
    EXPECT_EQ(error_code([&] { s->embedding(); }), "no_embedding");
    s->fingerprint(json::object());
    EXPECT_EQ(error_code([&] { s->cluster({{"k", 50}}); }), "k_too_large");
    EXPECT_EQ(s->cluster({{"k", 2}})["labels"].size(), 20u);
}

TEST(Session, AddControlAtCurrentPositionBarelyMoves) {
    SessionManager mgr(inline_executor());
    auto s = ready_session(mgr, 60, {{"method", "ckpca"}});
    const embed::Coords before = coords_of(s->embedding());
    std::vector<json> events;
    s->subscribe([&](const json& e) { events.push_back(e); });
    Interaction add;
    add.type = Interaction::Type::AddControl;
    add.index = 11;
    add.x = before(11, 0);
    add.y = before(11, 1);
    s->post(add);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0]["type"], "embedding");
    EXPECT_EQ(events[0]["constraints"]["control_points"].size(), 1u);
    const embed::Coords after = coords_of(events[0]);
    EXPECT_LT((after - before).rowwise().norm().maxCoeff(), 1e-3 * embed::diameter(before));
}

TEST(Session, RapidMovesCoalesceAndFinalEventIsExact) {
    ManualExecutor pool;
    SessionManager mgr(pool.executor());
    auto s = ready_session(mgr, 80, {{"method", "ckpca"}, {"constraints", {{"control_points", {{{"index", 3}, {"x", 0}, {"y", 0}}}}}}});
    std::vector<json> events;
    s->subscribe([&](const json& e) { events.push_back(e); });
    for (int t = 0; t < 100; ++t) s->post(move(3, 0.5 - t * 0.004, -0.2 + t * 0.003));
    pool.run();
    ASSERT_GE(events.size(), 1u);
    ASSERT_LE(events.size(), 100u);
    const json& last = events.back();
    EXPECT_EQ(last["constraints"]["control_points"][0]["x"], 0.5 - 99 * 0.004);
    EXPECT_EQ(last, s->embedding());

    auto fresh = ready_session(mgr, 80, {{"method", "ckpca"}, {"constraints", last["constraints"]}});
    EXPECT_LT((coords_of(fresh->embedding()) - coords_of(last)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Session, ZeroMustLinkStrengthEqualsNoLink) {
    SessionManager mgr(inline_executor());
    auto linked = ready_session(mgr, 60, {{"method", "ckpca"}, {"constraints", {{"must_links", {{2, 40}}}, {"mu_ml", 5.0}}}});
    Interaction zero;
    zero.type = Interaction::Type::SetStrength;
    zero.kind = Interaction::Target::Must;
    zero.value = 0.0;
    linked->post(zero);
    auto plain = ready_session(mgr, 60, {{"method", "ckpca"}});
    EXPECT_LT((coords_of(linked->embedding()) - coords_of(plain->embedding())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Session, VersionsIncreaseAndErrorsAreEvents) {
    SessionManager mgr(inline_executor());
    auto s = ready_session(mgr, 40, {{"method", "kpca"}});
    std::vector<json> events;
    s->subscribe([&](const json& e) { events.push_back(e); });
    s->post(move(1, 0, 0));
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0]["type"], "error");
    EXPECT_EQ(events[0]["code"], "not_ckpca");

    s->embed({{"method", "ckpca"}});
    s->post(move(1, 0, 0));
    EXPECT_EQ(events.back()["code"], "unknown_control");
    Interaction add;
    add.type = Interaction::Type::AddControl;
    add.index = 1;
    for (int t = 0; t < 5; ++t) {
        add.x = 0.1 * t;
        s->post(add);
        s->post(move(1, 0.1 * t, 0.5));
    }
    Interaction link;
    link.type = Interaction::Type::AddLink;
    link.kind = Interaction::Target::Cannot;
    link.i = 4;
    link.j = 4;
    s->post(link);
    EXPECT_EQ(events.back()["code"], "invalid_constraint");
    std::uint64_t last = 0;
    for (const auto& e : events) {
        if (e["type"] != "embedding") continue;
        EXPECT_GT(e["version"].get<std::uint64_t>(), last);
        last = e["version"].get<std::uint64_t>();
    }
    EXPECT_EQ(s->embedding()["version"], last);
}

TEST(Session, SessionsAreIsolated) {
    SessionManager mgr(inline_executor());
    const json body = {{"method", "ckpca"}, {"constraints", {{"control_points", {{{"index", 0}, {"x", 0}, {"y", 0}}}}}}};
    auto a = ready_session(mgr, 50, body);
    auto b = ready_session(mgr, 50, body);
    auto ref = ready_session(mgr, 50, body);
    for (int t = 0; t < 10; ++t) {
        a->post(move(0, 0.05 * t, 0.1));
        b->post(move(0, -0.05 * t, -0.3));
    }
    ref->post(move(0, 0.45, 0.1));
    EXPECT_EQ(a->embedding()["coords"], ref->embedding()["coords"]);
    EXPECT_NE(a->embedding()["coords"], b->embedding()["coords"]);
}

TEST(Session, ThreadedWorkerDrainsEverything) {
    std::vector<std::thread> threads;
    std::mutex m;
    SessionManager mgr([&](std::function<void()> t) {
        std::lock_guard lock(m);
        threads.emplace_back(std::move(t));
    });
    auto s = ready_session(mgr, 60, {{"method", "ckpca"}, {"constraints", {{"control_points", {{{"index", 5}, {"x", 0}, {"y", 0}}}}}}});
    std::atomic<int> seen{0};
    s->subscribe([&](const json&) { ++seen; });
    for (int t = 0; t < 200; ++t) s->post(move(5, t * 0.001, 0.0));
    s->wait_idle();
    {
        std::lock_guard lock(m);
        for (auto& t : threads) t.join();
    }
    EXPECT_GE(seen.load(), 1);
    EXPECT_LE(seen.load(), 200);
    EXPECT_EQ(s->embedding()["constraints"]["control_points"][0]["x"], 0.199);
}

TEST(Session, SearchAndInfo) {
    SessionManager mgr(inline_executor());
    auto s = mgr.create("m", molecules(300));
    const json hits = s->search("O=");
    ASSERT_GT(hits["matches"].size(), 0u);
    for (const auto& h : hits["matches"]) EXPECT_NE(h["smiles"].get<std::string>().find("O="), std::string::npos);
    EXPECT_EQ(s->search("mol-01")["matches"].size(), 10u);
    EXPECT_TRUE(s->search("")["matches"].empty());
    EXPECT_EQ(s->info()["count"], 300);
}

TEST(SessionManager, LookupRemovalAndEviction) {
    SessionManager mgr(inline_executor(), std::chrono::minutes(60));
    auto a = mgr.create("m", molecules(5));
    auto b = mgr.create("m", molecules(5));
    EXPECT_NE(a->id(), b->id());
    EXPECT_EQ(mgr.get(a->id()), a);
    EXPECT_EQ(error_code([&] { mgr.get("nope"); }), "unknown_session");
    EXPECT_EQ(mgr.evict_idle(Session::Clock::now() + std::chrono::minutes(59)), 0u);
    EXPECT_EQ(mgr.evict_idle(Session::Clock::now() + std::chrono::minutes(61)), 2u);
    EXPECT_EQ(mgr.count(), 0u);
    auto c = mgr.create("m", molecules(5));
    EXPECT_TRUE(mgr.remove(c->id()));
    EXPECT_FALSE(mgr.remove(c->id()));
}
