#include "support.hpp"
#include "tempostyle/conditional_content.hpp"
#include "tempostyle/errors.hpp"

using namespace tempostyle;

TEST_SUITE("conditional_content") {
  TEST_CASE("ramp endpoints and interior") {
    RampSchedule r;
    CHECK(ramp(r, 0) == 0.0);
    CHECK(ramp(r, 4000) == 0.0);
    CHECK(ramp(r, 5000) == 0.5);
    CHECK(ramp(r, 6000) == 1.0);
    CHECK(ramp(r, 120000) == 1.0);
    CHECK_THROWS_AS((RampSchedule{10, 10}.validate()), ConfigError);
    CHECK_THROWS_AS((RampSchedule{10, 5}.validate()), ConfigError);
  }

  TEST_CASE("lambda = 0 removes the action from the content style") {
    torch::manual_seed(1);
    ContentEncoder fc(4, 4, 16, 32, true);
    torch::NoGradGuard guard;
    auto a = fc->forward(torch::tensor({2}, torch::kInt64), torch::tensor({0}, torch::kInt64), 0.0);
    auto b = fc->forward(torch::tensor({2}, torch::kInt64), torch::tensor({3}, torch::kInt64), 0.0);
    CHECK(torch::equal(a, b));
    auto c = fc->forward(torch::tensor({2}, torch::kInt64), torch::tensor({3}, torch::kInt64), 1.0);
    CHECK_FALSE(torch::equal(a, c));
  }

  TEST_CASE("interpolation endpoints return table rows exactly") {
    torch::manual_seed(2);
    ContentEncoder fc(4, 4, 16, 32, true);
    CHECK(torch::equal(fc->interpolate_action(1, 3, 0.0), fc->action_table[1]));
    CHECK(torch::equal(fc->interpolate_action(1, 3, 1.0), fc->action_table[3]));
    CHECK(torch::equal(fc->interpolate_actor(0, 2, 1.0), fc->actor_table[2]));
    auto mid = fc->interpolate_actor(0, 2, 0.25);
    CHECK(torch::allclose(mid, 0.75 * fc->actor_table[0] + 0.25 * fc->actor_table[2]));
    CHECK_THROWS_AS(fc->interpolate_action(0, 1, 1.5), DomainError);
    CHECK_THROWS_AS(fc->interpolate_action(0, 1, -0.1), DomainError);
  }

  TEST_CASE("unknown labels are rejected") {
    ContentEncoder fc(4, 4, 16, 32, true);
    CHECK_THROWS_AS(fc->check_label({4, 0}), LookupError);
    CHECK_THROWS_AS(fc->check_label({0, -1}), LookupError);
    CHECK_THROWS_AS(fc->content_style({0, 9}, 1.0), LookupError);
    CHECK_THROWS_AS(fc->forward(torch::tensor({7}, torch::kInt64), torch::tensor({0}, torch::kInt64), 1.0),
                    LookupError);
  }

  TEST_CASE("content style is deterministic and sized c_dim") {
    ContentEncoder fc(4, 4, 16, 32, true);
    auto a = fc->content_style({1, 2}, 0.7);
    auto b = fc->content_style({1, 2}, 0.7);
    CHECK(a.w.size() == 32);
    CHECK(a.w == b.w);
  }

  TEST_CASE("unconditional mode has no label tables") {
    ContentEncoder fc(4, 4, 16, 32, false);
    auto names = fc->named_parameters(true);
    CHECK_FALSE(names.contains("actor_table"));
    CHECK_FALSE(names.contains("action_table"));
    CHECK(fc->from_noise(torch::randn({2, 32})).sizes() == torch::IntArrayRef({2, 32}));
    CHECK_THROWS_AS(fc->from_noise(torch::randn({2, 31})), ConfigError);
  }
}
