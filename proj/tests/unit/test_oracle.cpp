#include "support.hpp"
#include "tempostyle/dataio.hpp"
#include "tempostyle/oracle.hpp"

using namespace tempostyle;

TEST_SUITE("oracle") {
  TEST_CASE("nearest centroid separates shifted clusters") {
    Eigen::MatrixXd x(6, 2);
    x << 0, 0, 0.1, 0, 0, 0.1, 5, 5, 5.1, 5, 5, 5.1;
    NearestCentroid nc;
    CHECK_FALSE(nc.fitted());
    nc.fit(x, {0, 0, 0, 1, 1, 1}, 2);
    CHECK(nc.fitted());
    CHECK(nc.predict(Eigen::Vector2d(0.2, -0.1)) == 0);
    CHECK(nc.predict(Eigen::Vector2d(4.0, 4.5)) == 1);
  }

  TEST_CASE("oracle classifies held-out synthetic clips") {
    SynthSpec spec;
    spec.resolution = 32;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> phase(0, 1);
    std::vector<VideoClip> train, test;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        for (int i = 0; i < 3; ++i) train.push_back(render_synth_clip(a, b, 32, phase(rng), spec));
        for (int i = 0; i < 2; ++i) test.push_back(render_synth_clip(a, b, 32, phase(rng), spec));
      }
    }
    OracleClassifier oracle;
    oracle.fit(train, 4, 4);
    CHECK(oracle.action_accuracy(test) >= 0.95);
    CHECK(oracle.actor_accuracy(test) >= 0.95);
    CHECK(action_features(test[0]).size() == 6);
    CHECK(identity_features(test[0]).size() == 3);
  }
}
