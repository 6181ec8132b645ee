#include <doctest.h>

#include "memfuse/av_features.hpp"
#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"
#include "support.hpp"

using namespace memfuse;

TEST_CASE("dimension contract") {
    CHECK(kAudioDim == 1582);
    CHECK(kVisualDim == 271 + 4096 + 4342);
}

TEST_CASE("audio loading") {
    const auto dir = testing::scratch_dir("av_audio");
    AudioFeatures a{"v1", std::vector<double>(kAudioDim, 0.25)};
    write_audio_features(dir / "full.csv", a);
    CHECK(load_audio_features(dir / "full.csv", "v1").vector == a.vector);

    AudioFeatures short_row{"v1", std::vector<double>(kAudioDim - 1, 0.25)};
    write_audio_features(dir / "short.csv", short_row);
    try {
        load_audio_features(dir / "short.csv", "v1");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1582") != std::string::npos);
        CHECK(msg.find("1581") != std::string::npos);
    }

    write_text_file(dir / "nan.csv", "1,NaN,3\n");
    CHECK_THROWS_AS(load_audio_features(dir / "nan.csv", "v1", 3), InputError);
}

TEST_CASE("frame loading and pooling") {
    const auto dir = testing::scratch_dir("av_frames");
    write_text_file(dir / "toy.csv", "1,2,3,4\n5,6,7,8\n0,0,0,0\n");
    const FrameFeatures f = load_frame_features(dir / "toy.csv", "v1", 4);
    CHECK(f.frames.size() == 3);
    CHECK(pool_frames(f) == std::vector<double>{2.0, 8.0 / 3.0, 10.0 / 3.0, 4.0});

    write_text_file(dir / "empty.csv", "");
    CHECK_THROWS_AS(load_frame_features(dir / "empty.csv", "v1", 4), InputError);
    write_text_file(dir / "ragged.csv", "1,2,3,4\n1,2,3\n");
    CHECK_THROWS_AS(load_frame_features(dir / "ragged.csv", "v1", 4), InputError);

    FrameFeatures single{"v", {{0.5, -1.0}}};
    CHECK(pool_frames(single) == single.frames[0]);
    FrameFeatures two{"v", {{0.0, 2.0}, {2.0, 0.0}}};
    CHECK(pool_frames(two) == std::vector<double>{1.0, 1.0});
    FrameFeatures copies{"v", {{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}}};
    CHECK(pool_frames(copies)[0] == doctest::Approx(0.3).epsilon(1e-15));

    FrameFeatures fwd{"v", {{1.0, 2.0}, {3.0, 5.0}, {4.0, 0.5}}};
    FrameFeatures rev{"v", {{4.0, 0.5}, {3.0, 5.0}, {1.0, 2.0}}};
    const auto a = pool_frames(fwd), b = pool_frames(rev);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-15));
    FrameFeatures twice = fwd;
    twice.frames.insert(twice.frames.end(), fwd.frames.begin(), fwd.frames.end());
    CHECK(pool_frames(twice)[1] == doctest::Approx(a[1]).epsilon(1e-15));
}

TEST_CASE("serialization round trip at declared precision") {
    const auto dir = testing::scratch_dir("av_roundtrip");
    write_text_file(dir / "in.csv", "0.125,-3.5,1e-3,42\n");
    const AudioFeatures a = load_audio_features(dir / "in.csv", "v", 4);
    write_audio_features(dir / "out.csv", a, 6);
    const AudioFeatures b = load_audio_features(dir / "out.csv", "v", 4);
    CHECK(a.vector == b.vector);
    write_audio_features(dir / "out2.csv", b, 6);
    CHECK(read_text_file(dir / "out.csv") == read_text_file(dir / "out2.csv"));
}

TEST_CASE("manifest loading") {
    const auto dir = testing::scratch_dir("av_manifest");
    write_audio_features(dir / "v1_audio.csv", AudioFeatures{"v1", {1.0, 2.0}});
    write_frame_features(dir / "v1_frames.csv", FrameFeatures{"v1", {{1.0, 1.0, 1.0}, {3.0, 3.0, 3.0}}});
    write_av_manifest(dir / "manifest.json", {{"v1", AvPaths{"v1_audio.csv", "v1_frames.csv"}}});
    const auto av = load_av_features(dir / "manifest.json", AvDims{2, 3});
    REQUIRE(av.count("v1") == 1);
    CHECK(av.at("v1").audio == std::vector<double>{1.0, 2.0});
    CHECK(av.at("v1").visual == std::vector<double>{2.0, 2.0, 2.0});
    CHECK_THROWS_AS(load_av_features(dir / "manifest.json"), InputError);
}
