// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <random>
#include <thread>

#include "emf/core/container.hpp"
#include "emf/core/json.hpp"
#include "emf/error.hpp"
#include "emf/metrics/metrics.hpp"
#include "emf/protocol/mock_expert.hpp"
#include "emv_reader.hpp"
#include "ref_metrics.hpp"
#include "test_util.hpp"

namespace emf::metrics {
namespace {

using testing::fill_box;
using testing::make_prompt;
using testing::set_pixel;
using testing::solid_clip;

void expect_code(const std::function<void()>& fn, ErrorCode code) {
    try {
        fn();
        FAIL() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

VideoClip checkerboard(std::uint32_t side, std::uint32_t frames) {
    auto c = solid_clip(side, side, frames, {0, 0, 0});
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::uint32_t y = 0; y < side; ++y) {
            for (std::uint32_t x = 0; x < side; ++x) {
                if ((x + y) % 2 == 1) set_pixel(c, f, x, y, {255, 255, 255});
            }
        }
    }
    return c;
}

TEST(Imaging, AllBlackScoresZero) { EXPECT_DOUBLE_EQ(imaging_quality(solid_clip(8, 8, 3, {0, 0, 0})), 0.0); }

TEST(Imaging, MidGrayScoresHalf) { EXPECT_DOUBLE_EQ(imaging_quality(solid_clip(8, 8, 3, {128, 128, 128})), 0.5); }

TEST(Imaging, CheckerboardMatchesConvolutionOracle) {
    const auto c = checkerboard(8, 2);
    const double v_ref = oracle::ref_laplacian_variance(c.frames[0].pixels, 8, 8);
    // Balanced 6x6 interior: responses are +/-1020 with zero mean.
    EXPECT_DOUBLE_EQ(v_ref, 1020.0 * 1020.0);
    EXPECT_DOUBLE_EQ(laplacian_variance(c.frames[0], 8, 8), v_ref);
    EXPECT_NEAR(imaging_quality(c), 0.5 * v_ref / (v_ref + 100.0), 1e-12);
}

TEST(Imaging, LaplacianMatchesOracleOnOddShapes) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 50; ++i) {
        const auto c = testing::random_clip(rng);
        const auto& f = c.frames[0];
        EXPECT_NEAR(laplacian_variance(f, c.params.width, c.params.height),
                    oracle::ref_laplacian_variance(f.pixels, c.params.width, c.params.height), 1e-6);
    }
    EXPECT_DOUBLE_EQ(laplacian_variance(checkerboard(2, 2).frames[0], 2, 2), 0.0);
}

TEST(Background, ConstantIsOne) { EXPECT_DOUBLE_EQ(background_consistency(solid_clip(8, 8, 4, {90, 30, 200})), 1.0); }

TEST(Background, DisjointColorFlipIsZero) {
    auto c = solid_clip(8, 8, 4, {16, 16, 16});
    for (std::size_t f = 1; f < 4; f += 2) fill_box(c, f, Box{0, 0, 8, 8}, {240, 240, 240});
    EXPECT_DOUBLE_EQ(background_consistency(c), 0.0);
}

TEST(Background, MovingForegroundIsExcluded) {
    auto c = solid_clip(16, 16, 6, {70, 130, 190});
    SubjectTrack t{"ball", {}};
    for (std::size_t f = 0; f < 6; ++f) {
        const Box b{static_cast<std::int32_t>(2 * f), 4, 4, 4};
        fill_box(c, f, b, {250, 5, 5});
        t.boxes.emplace_back(b);
    }
    c.tracks.push_back(t);
    EXPECT_DOUBLE_EQ(background_consistency(c), 1.0);
}

TEST(Background, TooFewFrames) {
    auto c = solid_clip(4, 4, 1, {1, 1, 1});
    expect_code([&] { background_consistency(c); }, ErrorCode::TooFewFrames);
}

TEST(Subject, OneAbsentOneConsistentIsHalf) {
    auto c = solid_clip(16, 16, 4, {40, 40, 40});
    SubjectTrack t{"cat", {}};
    for (std::size_t f = 0; f < 4; ++f) {
        const Box b{static_cast<std::int32_t>(f), 2, 4, 4};
        fill_box(c, f, b, {200, 100, 50});
        t.boxes.emplace_back(b);
    }
    c.tracks.push_back(t);
    EXPECT_DOUBLE_EQ(subject_consistency(c, {"cat", "dog"}), 0.5);
    EXPECT_DOUBLE_EQ(subject_consistency(c, {"dog"}), 0.0);
    EXPECT_DOUBLE_EQ(subject_consistency(c, {"cat"}), 1.0);
}

TEST(Subject, SinglePresentFrameScoresZero) {
    auto c = solid_clip(8, 8, 4, {40, 40, 40});
    c.tracks.push_back(SubjectTrack{"cat", {Box{0, 0, 2, 2}, std::nullopt, std::nullopt, std::nullopt}});
    EXPECT_DOUBLE_EQ(subject_consistency(c, {"cat"}), 0.0);
}

TEST(Subject, PermutationSymmetric) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 40; ++i) {
        const auto c = testing::random_clip(rng);
        std::vector<std::string> s{"a cat", "a dog", "school teacher", "student"};
        const double base = subject_consistency(c, s);
        std::shuffle(s.begin(), s.end(), rng);
        EXPECT_NEAR(subject_consistency(c, s), base, 1e-12);
    }
}

VideoClip presence_clip(std::size_t frames, std::size_t present) {
    auto c = solid_clip(8, 8, static_cast<std::uint32_t>(frames), {50, 50, 50});
    SubjectTrack t{"teacher", std::vector<std::optional<Box>>(frames)};
    for (std::size_t f = 0; f < present; ++f) t.boxes[f] = Box{1, 1, 2, 2};
    c.tracks.push_back(t);
    SubjectTrack s{"student", std::vector<std::optional<Box>>(frames, Box{4, 4, 2, 2})};
    c.tracks.push_back(s);
    return c;
}

TEST(Overall, PresenceThresholdRule) {
    const auto prompt = make_prompt("student studying while teacher teaching", {"teacher", "student"});
    EXPECT_DOUBLE_EQ(overall_consistency(presence_clip(10, 10), prompt), 1.0);
    EXPECT_DOUBLE_EQ(overall_consistency(presence_clip(10, 0), prompt), 0.5);
    EXPECT_DOUBLE_EQ(overall_consistency(presence_clip(10, 4), prompt), 0.5);  // 40% contributes nothing
    EXPECT_DOUBLE_EQ(overall_consistency(presence_clip(10, 5), prompt), 1.0);
}

TEST(Overall, FallsBackToExtractedSubjects) {
    const auto prompt = make_prompt("student studying while teacher teaching");
    EXPECT_EQ(prompt_subjects(prompt), (std::vector<std::string>{"student", "teacher"}));
    EXPECT_DOUBLE_EQ(overall_consistency(presence_clip(10, 0), prompt), 0.5);
}

TEST(Evaluate, MeanOfFourScores) {
    const auto r = QualityReport::from_scores(0.8, 1.0, 0.5, 0.5);
    EXPECT_DOUBLE_EQ(r.average_quality, 0.7);
}

TEST(Evaluate, MatchesBruteForceOracleOnRandomClips) {
    std::mt19937_64 rng(23);
    const std::vector<std::string> subjects{"a cat", "student"};
    for (int i = 0; i < 60; ++i) {
        const auto c = testing::random_clip(rng);
        const auto r = evaluate_with_subjects(c, make_prompt("x"), subjects);
        const auto ref = oracle::ref_evaluate(oracle::read_emv(encode_clip(c)), subjects);
        EXPECT_NEAR(r.imaging_quality, ref.imaging, 1e-9) << i;
        EXPECT_NEAR(r.background_consistency, ref.background, 1e-9) << i;
        EXPECT_NEAR(r.subject_consistency, ref.subject, 1e-9) << i;
        EXPECT_NEAR(r.overall_consistency, ref.overall, 1e-9) << i;
        EXPECT_NEAR(r.average_quality, ref.average, 1e-9) << i;
    }
}

TEST(Evaluate, MockClipMatchesOracleAndIsPure) {
    GenerationParams p;
    p.width = 32;
    p.height = 32;
    p.frame_count = 8;
    const auto c = protocol::mock_generate("a cat walking", p);
    const auto prompt = make_prompt("a cat walking");
    const auto r1 = evaluate(c, prompt);
    const auto r2 = evaluate(decode_clip(encode_clip(c)), prompt);
    EXPECT_EQ(r1, r2);
    const auto ref = oracle::ref_evaluate(oracle::read_emv(encode_clip(c)), prompt_subjects(prompt));
    EXPECT_NEAR(r1.average_quality, ref.average, 1e-9);
    EXPECT_NEAR(r1.background_consistency, ref.background, 1e-9);
    EXPECT_DOUBLE_EQ(r1.overall_consistency, 1.0);
}

TEST(Evaluate, ScoresBoundedOnRandomClips) {
    std::mt19937_64 rng(24);
    for (int i = 0; i < 300; ++i) {
        const auto c = testing::random_clip(rng);
        const auto r = evaluate_with_subjects(c, make_prompt("x"), {"a dog", "school teacher"});
        for (double v : {r.imaging_quality, r.background_consistency, r.subject_consistency, r.overall_consistency,
                         r.average_quality}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Features, HistogramShapeAndCosine) {
    const auto c = solid_clip(4, 4, 2, {10, 130, 250});
    const auto h = color_histogram(c.frames[0], 4, 4, {}, 8);
    ASSERT_EQ(h.size(), 24u);
    EXPECT_DOUBLE_EQ(h[0], 1.0);       // R bin 0
    EXPECT_DOUBLE_EQ(h[8 + 4], 1.0);   // G bin 4
    EXPECT_DOUBLE_EQ(h[16 + 7], 1.0);  // B bin 7
    const auto empty = color_histogram(c.frames[0], 4, 4, std::vector<std::uint8_t>(16, 0), 8);
    for (double v : empty) EXPECT_DOUBLE_EQ(v, 1.0 / 8);
    EXPECT_DOUBLE_EQ(cosine_similarity(h, h), 1.0);
    EXPECT_THROW(cosine_similarity(h, FeatureVector(3)), Error);
}

TEST(MetricsConfigTest, Validation) {
    MetricsConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.hist_bins = 1;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.sharpness_constant = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.scorer = ScorerMode::External;
    EXPECT_THROW(cfg.validate(), Error);
}

// Local HTTP stand-in for an external video-text scorer.
class StubScorer {
public:
    explicit StubScorer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/score", [handler](const httplib::Request& req, httplib::Response& res) { handler(req, res); });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubScorer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/score"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

TEST(External, DelegatesAndClamps) {
    std::string seen_prompt;
    std::size_t seen_len = 0;
    StubScorer stub([&](const httplib::Request& req, httplib::Response& res) {
        const auto body = Json::parse(req.body);
        seen_prompt = body.at("prompt").get<std::string>();
        seen_len = body.at("clip_base64").get<std::string>().size();
        res.set_content(R"({"score": 1.7})", "application/json");
    });
    MetricsConfig cfg;
    cfg.scorer = ScorerMode::External;
    cfg.external.endpoint = stub.endpoint();
    const auto c = solid_clip(4, 4, 2, {100, 100, 100});
    EXPECT_DOUBLE_EQ(overall_consistency(c, make_prompt("a cat"), cfg), 1.0);
    EXPECT_EQ(seen_prompt, "a cat");
    EXPECT_EQ(seen_len, (encode_clip(c).size() + 2) / 3 * 4);
}

TEST(External, FailuresAreScorerUnavailable) {
    StubScorer stub([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    MetricsConfig cfg;
    cfg.scorer = ScorerMode::External;
    cfg.external.endpoint = stub.endpoint();
    cfg.external.timeout = std::chrono::milliseconds(500);
    const auto c = solid_clip(4, 4, 2, {100, 100, 100});
    expect_code([&] { overall_consistency(c, make_prompt("a cat"), cfg); }, ErrorCode::ScorerUnavailable);
    cfg.external.endpoint = "http://127.0.0.1:1/score";
    expect_code([&] { overall_consistency(c, make_prompt("a cat"), cfg); }, ErrorCode::ScorerUnavailable);
}

TEST(External, MalformedReply) {
    StubScorer stub([](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
    MetricsConfig cfg;
    cfg.scorer = ScorerMode::External;
    cfg.external.endpoint = stub.endpoint();
    expect_code([&] { overall_consistency(solid_clip(4, 4, 2, {1, 1, 1}), make_prompt("a cat"), cfg); },
                ErrorCode::ScorerUnavailable);
}

}  // namespace
}  // namespace emf::metrics
