#include <doctest.h>

#include "pocodom/config.hpp"
#include "pocodom/error.hpp"

using namespace pocodom;

namespace {

ErrorCode parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults survive a round trip") {
    const PipelineConfig d;
    const std::string text = format_config(d);
    CHECK(format_config(parse_config(text)) == text);
    CHECK(parse_config("").frame_skip == 1);
  }

  TEST_CASE("every edited field round-trips") {
    PipelineConfig c;
    c.frame_skip = 5;
    c.map_voxel = 0.35;
    c.enable_object_removal = false;
    c.rng_seed = 1234567890123ULL;
    c.ransac.iterations = 77;
    c.cluster.eps = 0.123456789012;
    c.grid.n = 128;
    c.grid.model = ProbabilityModel::Logistic;
    c.poc.r_min = 7.5;
    c.poc.log_magnitude = false;
    c.icp.max_correspondence_distance = 1.7;
    c.frame_convention = FrameConvention::lidar_xleft_yup_zforward();
    const PipelineConfig back = parse_config(format_config(c));
    CHECK(back.frame_skip == 5);
    CHECK(back.map_voxel == 0.35);
    CHECK_FALSE(back.enable_object_removal);
    CHECK(back.rng_seed == 1234567890123ULL);
    CHECK(back.ransac.iterations == 77);
    CHECK(back.cluster.eps == 0.123456789012);
    CHECK(back.grid.n == 128);
    CHECK(back.grid.model == ProbabilityModel::Logistic);
    CHECK(back.poc.r_min == 7.5);
    CHECK_FALSE(back.poc.log_magnitude);
    CHECK(back.icp.max_correspondence_distance == 1.7);
    CHECK(back.frame_convention == FrameConvention::lidar_xleft_yup_zforward());
    CHECK(format_config(back) == format_config(c));
  }

  TEST_CASE("syntax") {
    const PipelineConfig c = parse_config(
        "# comment\n"
        "[pipeline]\n"
        "  frame_skip = 2   ; trailing comment\n"
        "\n"
        "[icp]\n"
        "max_iterations=12\n");
    CHECK(c.frame_skip == 2);
    CHECK(c.icp.max_iterations == 12);
  }

  TEST_CASE("fail fast") {
    CHECK(parse_error("[pipeline]\nframe_skp = 2\n") == ErrorCode::MalformedConfig);
    CHECK(parse_error("[nonsense]\n") == ErrorCode::MalformedConfig);
    CHECK(parse_error("frame_skip = 2\n") == ErrorCode::MalformedConfig);
    CHECK(parse_error("[pipeline]\nframe_skip = two\n") == ErrorCode::MalformedConfig);
    CHECK(parse_error("[pipeline]\nframe_skip\n") == ErrorCode::MalformedConfig);
    CHECK(parse_error("[pipeline\n") == ErrorCode::MalformedConfig);
    CHECK(parse_error("[pipeline]\nframe_skip = 0\n") == ErrorCode::MalformedConfig);
    CHECK(parse_error("[pipeline]\nenable_object_removal = maybe\n") == ErrorCode::MalformedConfig);
  }

  TEST_CASE("signed axes") {
    CHECK(parse_signed_axis("+x") == SignedAxis{0, 1});
    CHECK(parse_signed_axis(" -z ") == SignedAxis{2, -1});
    CHECK(format_signed_axis({1, -1}) == "-y");
    CHECK_THROWS_AS(parse_signed_axis("x"), Error);
    CHECK_THROWS_AS(parse_signed_axis("+w"), Error);
  }
}
