#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "xda/error.hpp"
#include "xda/ops.hpp"
#include "xda/selftrain.hpp"

using namespace xda;
using test_util::random_tensor;

TEST_CASE("pseudo_labels_from_probs thresholding") {
    Tensor probs = Tensor::zeros({2, 1, 2});
    probs.at(0, 0, 0) = 0.95;
    probs.at(1, 0, 0) = 0.05;
    probs.at(0, 0, 1) = 0.55;
    probs.at(1, 0, 1) = 0.45;

    const LabelMap labels = pseudo_labels_from_probs(probs, 0.9);
    CHECK(labels.at(0, 0) == 0);
    CHECK(labels.at(0, 1) == LabelMap::kIgnore);

    CHECK_THROWS_AS(pseudo_labels_from_probs(probs, 0.0), ContractError);
    CHECK_THROWS_AS(pseudo_labels_from_probs(probs, 1.5), ContractError);
}

TEST_CASE("threshold 1.0 ignores every softmax output") {
    std::mt19937_64 rng(1);
    const Tensor probs = softmax(random_tensor({4, 6, 6}, rng, 2.0), 0);
    const LabelMap labels = pseudo_labels_from_probs(probs, 1.0);
    for (const std::uint8_t v : labels.values) CHECK(v == LabelMap::kIgnore);
}

TEST_CASE("raising the threshold never decreases the ignore count") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor probs = softmax(random_tensor({5, 8, 8}, rng, 3.0), 0);
        double prev = -1.0;
        for (const double th : {0.3, 0.5, 0.7, 0.9, 0.99, 1.0}) {
            const std::vector<LabelMap> ls = {pseudo_labels_from_probs(probs, th)};
            const double frac = ignore_fraction(ls);
            CHECK(frac >= prev);
            prev = frac;
        }
    }
}

TEST_CASE("generate_pseudo_labels is deterministic and in-range") {
    ModelConfig cfg;
    cfg.channels = 8;
    cfg.attn_channels = 2;
    cfg.num_classes = 4;
    cfg.disc_width_mult = 0.0625;
    const ModelBundle model = ModelBundle::init(cfg, 7);

    std::mt19937_64 rng(3);
    std::vector<Tensor> images;
    for (int i = 0; i < 3; ++i) {
        Tensor img = random_tensor({3, 16, 16}, rng, 0.3);
        for (std::size_t k = 0; k < img.size(); ++k) img[k] = std::abs(img[k]);
        images.push_back(img);
    }

    const PseudoLabelConfig pl{0.3};
    const std::vector<LabelMap> first = generate_pseudo_labels(model, images, pl);
    const std::vector<LabelMap> second = generate_pseudo_labels(model, images, pl);
    REQUIRE(first.size() == 3);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i] == second[i]);
        for (const std::uint8_t v : first[i].values) {
            CHECK((v < cfg.num_classes || v == LabelMap::kIgnore));
        }
    }
}
