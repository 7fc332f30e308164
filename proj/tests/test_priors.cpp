#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "corel/kernel.hpp"
#include "corel/priors.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace corel;

namespace {

/// Scratch file that removes itself, so suites can run from any directory.
struct TempFile {
    std::filesystem::path path;

    explicit TempFile(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {}
    ~TempFile() { std::filesystem::remove(path); }

    void write(const std::string& content) const {
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
};

} // namespace

TEST_CASE("profile counts with a pseudocount") {
    const Alphabet alphabet = Alphabet::generated(2);
    const Sequence ab = parse_sequence("AB", alphabet);
    const Sequence aa = parse_sequence("AA", alphabet);

    const ProfileModel model = profile_from_sequences({ab, aa}, alphabet, 1.0);
    // Identical position: (2+1)/(2+2) and (0+1)/(2+2).
    CHECK(model.probs()(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(model.probs()(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
    // Split position: (1+1)/(2+2) each.
    CHECK(model.probs()(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.probs()(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.pseudocount() == 1.0);
}

TEST_CASE("profile rows are strictly positive distributions") {
    const Alphabet alphabet = Alphabet::generated(4);
    Rng rng(61);
    std::vector<Sequence> corpus;
    for (int i = 0; i < 12; ++i) corpus.push_back(test::random_sequence(rng, 6, 4));

    const ProfileModel model = profile_from_sequences(corpus, alphabet, 0.5);
    for (int l = 0; l < model.length(); ++l) {
        double sum = 0.0;
        for (int a = 0; a < model.alphabet_size(); ++a) {
            CHECK(model.probs()(l, a) > 0.0);
            sum += model.probs()(l, a);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Permutation invariance over the corpus.
    std::vector<Sequence> reversed(corpus.rbegin(), corpus.rend());
    const ProfileModel again = profile_from_sequences(reversed, alphabet, 0.5);
    CHECK((model.probs().probs() - again.probs().probs()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a vanishing pseudocount approaches the indicator of a single sequence") {
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence x = parse_sequence("BCA", alphabet);
    const ProfileModel model = profile_from_sequences({x}, alphabet, 1e-9);
    for (int l = 0; l < 3; ++l)
        CHECK(model.probs()(l, x[l]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("profile construction rejects bad input") {
    const Alphabet alphabet = Alphabet::generated(2);
    const Sequence aa = parse_sequence("AA", alphabet);
    const Sequence abc = Sequence{{0, 1, 0}};

    try {
        profile_from_sequences({}, alphabet, 1.0);
        FAIL("expected invalid_corpus");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_corpus);
    }
    CHECK_THROWS_AS(profile_from_sequences({aa}, alphabet, 0.0), Error);
    CHECK_THROWS_AS(profile_from_sequences({aa}, alphabet, -1.0), Error);
    CHECK_THROWS_AS(profile_from_sequences({aa, abc}, alphabet, 1.0), Error);  // ragged
}

TEST_CASE("weighting direction and scale") {
    const Alphabet alphabet = Alphabet::generated(2);
    const ProfileModel model =
        profile_from_sequences({parse_sequence("AB", alphabet), parse_sequence("AA", alphabet)},
                               alphabet, 1.0);

    const PositionWeighting prop = weighting_from_profile(model, 1.0);
    CHECK(prop(0, 0) == doctest::Approx(0.75));
    CHECK(prop(0, 1) == doctest::Approx(0.25));

    const PositionWeighting doubled = weighting_from_profile(model, 2.0);
    CHECK(doubled(0, 0) == doctest::Approx(1.5));

    const PositionWeighting inv =
        weighting_from_profile(model, 1.0, WeightingDirection::inverse);
    CHECK(inv(0, 0) == doctest::Approx(0.25));
    CHECK(inv(0, 1) == doctest::Approx(0.75));

    // Order preservation: heavier prior means heavier weight (proportional).
    CHECK((prop(0, 0) > prop(0, 1)) == (model.probs()(0, 0) > model.probs()(0, 1)));

    CHECK_THROWS_AS(weighting_from_profile(model, 0.0), Error);
    CHECK_THROWS_AS(weighting_from_profile(model, -2.0), Error);
}

TEST_CASE("uniform profile scaled by the alphabet size reduces the weighted kernel to plain") {
    const int length = 4, asize = 3;
    const ProfileModel uniform(uniform_distribution(length, asize), 1.0);
    const PositionWeighting w =
        weighting_from_profile(uniform, static_cast<double>(asize));
    for (int l = 0; l < length; ++l)
        for (int a = 0; a < asize; ++a) CHECK(w(l, a) == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(62);
    const KernelParams params(1.3, 0.9);
    for (int i = 0; i < 10; ++i) {
        const FactorizedDistribution p = test::random_distribution(rng, length, asize);
        const FactorizedDistribution q = test::random_distribution(rng, length, asize);
        CHECK(kernel_eval(KernelSpec::weighted(w, params), p, q) ==
              doctest::Approx(kernel_eval(KernelSpec::plain(params), p, q)).epsilon(1e-9));
    }
}

TEST_CASE("profile save and load round trip") {
    const Alphabet alphabet = Alphabet::generated(3);
    Rng rng(63);
    std::vector<Sequence> corpus;
    for (int i = 0; i < 7; ++i) corpus.push_back(test::random_sequence(rng, 5, 3));
    const ProfileModel model = profile_from_sequences(corpus, alphabet, 2.0);

    const TempFile file("corel_test_profile.json");
    save_profile(model, file.path.string());
    const ProfileModel loaded = load_profile(file.path.string());

    CHECK(loaded.pseudocount() == model.pseudocount());
    CHECK(loaded.length() == model.length());
    CHECK(loaded.alphabet_size() == model.alphabet_size());
    CHECK((loaded.probs().probs() - model.probs().probs()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("malformed profile files are rejected") {
    const TempFile file("corel_test_profile_bad.json");

    file.write("not json at all");
    try {
        load_profile(file.path.string());
        FAIL("expected invalid_corpus");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_corpus);
    }

    file.write("{\"pseudocount\": 1.0}");
    CHECK_THROWS_AS(load_profile(file.path.string()), Error);

    file.write("{\"probs\": [[0.5, 0.5], [0.5]]}");  // ragged
    CHECK_THROWS_AS(load_profile(file.path.string()), Error);

    file.write("{\"probs\": [[0.9, 0.3]]}");  // not a distribution
    CHECK_THROWS_AS(load_profile(file.path.string()), Error);

    CHECK_THROWS_AS(load_profile("/nonexistent/corel_profile.json"), Error);
}

TEST_CASE("corpus reading pads with the gap symbol") {
    const Alphabet alphabet("AC-");
    const TempFile file("corel_test_corpus.txt");
    file.write("ACA\r\nCC\n\nA\n");

    const std::vector<Sequence> seqs = read_corpus(file.path.string(), alphabet);
    REQUIRE(seqs.size() == 3);
    CHECK(format_sequence(seqs[0], alphabet) == "ACA");
    CHECK(format_sequence(seqs[1], alphabet) == "CC-");
    CHECK(format_sequence(seqs[2], alphabet) == "A--");
}

TEST_CASE("corpus errors carry the invalid_corpus code") {
    const Alphabet no_gap = Alphabet::generated(2);
    const TempFile file("corel_test_corpus_bad.txt");

    file.write("AB\nA\n");  // ragged without a gap symbol
    try {
        read_corpus(file.path.string(), no_gap);
        FAIL("expected invalid_corpus");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_corpus);
    }

    file.write("AB\nAX\n");  // unknown token
    CHECK_THROWS_AS(read_corpus(file.path.string(), no_gap), Error);

    file.write("\n\n");
    CHECK_THROWS_AS(read_corpus(file.path.string(), no_gap), Error);

    CHECK_THROWS_AS(read_corpus("/nonexistent/corel_corpus.txt", no_gap), Error);
}

TEST_CASE("toy decoder emits valid distributions deterministically") {
    const ToyDecoder dec(5, 4, 3, 77);
    Rng rng(64);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> z(3);
        for (auto& v : z) v = 3.0 * rng.normal();
        const FactorizedDistribution p = dec.decode(z);
        REQUIRE(p.length() == 5);
        REQUIRE(p.alphabet_size() == 4);
        for (int l = 0; l < 5; ++l) {
            double sum = 0.0;
            for (int a = 0; a < 4; ++a) {
                CHECK(p(l, a) > 0.0);
                sum += p(l, a);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }

    const ToyDecoder same(5, 4, 3, 77);
    const ToyDecoder other(5, 4, 3, 78);
    const std::vector<double> z = {0.3, -1.2, 0.8};
    CHECK((dec.decode(z).probs() - same.decode(z).probs()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dec.decode(z).probs() - other.decode(z).probs()).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("toy decoder handles extremes and rejects bad latents") {
    const ToyDecoder dec(3, 3, 2, 5);

    // Softmax stays finite far from the origin.
    const FactorizedDistribution far = dec.decode({1e6, -1e6});
    for (int l = 0; l < 3; ++l) {
        double sum = 0.0;
        for (int a = 0; a < 3; ++a) sum += far(l, a);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }

    try {
        dec.decode({1.0});
        FAIL("expected dimension_mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::dimension_mismatch);
    }
    try {
        dec.decode({0.0, std::nan("")});
        FAIL("expected invalid_input");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_input);
    }
    CHECK_THROWS_AS(ToyDecoder(0, 3, 2, 5), Error);
    CHECK_THROWS_AS(ToyDecoder(3, 1, 2, 5), Error);
    CHECK_THROWS_AS(ToyDecoder(3, 3, 0, 5), Error);
}

TEST_CASE("decoded kernel values vary smoothly along latent directions") {
    const ToyDecoder dec(4, 3, 3, 9);
    Rng rng(65);
    const FactorizedDistribution q = test::random_distribution(rng, 4, 3);
    const KernelSpec spec = KernelSpec::plain(KernelParams(1.0, 1.0));
    const auto value = [&](const std::vector<double>& z) {
        return kernel_eval(spec, dec.decode(z), q);
    };

    const std::vector<double> z0 = {0.4, -0.2, 0.9};
    const double h = 1e-5;
    for (int k = 0; k < 3; ++k) {
        auto lo = z0, hi = z0;
        lo[static_cast<size_t>(k)] -= h;
        hi[static_cast<size_t>(k)] += h;
        const double central = (value(hi) - value(lo)) / (2.0 * h);
        auto lo2 = z0, hi2 = z0;
        lo2[static_cast<size_t>(k)] -= 2.0 * h;
        hi2[static_cast<size_t>(k)] += 2.0 * h;
        const double wide = (value(hi2) - value(lo2)) / (4.0 * h);
        // Two stencil widths agree: no kinks along the coordinate directions.
        CHECK(central == doctest::Approx(wide).epsilon(1e-4));
    }

    // Empirically Lipschitz on a bounded ball.
    double max_ratio = 0.0;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> a(3), b(3);
        for (int k = 0; k < 3; ++k) {
            a[static_cast<size_t>(k)] = 2.0 * rng.uniform() - 1.0;
            b[static_cast<size_t>(k)] = a[static_cast<size_t>(k)] + 0.01 * rng.normal();
        }
        double dist = 0.0;
        for (int k = 0; k < 3; ++k)
            dist += (a[static_cast<size_t>(k)] - b[static_cast<size_t>(k)]) *
                    (a[static_cast<size_t>(k)] - b[static_cast<size_t>(k)]);
        dist = std::sqrt(dist);
        if (dist < 1e-12) continue;
        const double gap =
            (dec.decode(a).probs() - dec.decode(b).probs()).cwiseAbs().maxCoeff();
        max_ratio = std::max(max_ratio, gap / dist);
    }
    CHECK(max_ratio < 100.0);
}
