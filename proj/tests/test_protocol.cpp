#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "neuroauth/error.hpp"
#include "neuroauth/protocol.hpp"
#include "neuroauth/random.hpp"
#include "support.hpp"

using namespace neuroauth;
using neuroauth::testing::blob_features;
using neuroauth::testing::dual_violation;
using neuroauth::testing::fit_difference;
using neuroauth::testing::quick_auth_config;

namespace {

// genuine rows first, then `per_impostor[k]` rows of impostor k + 2; one column.
LabeledSet labeled(std::size_t genuine, const std::vector<std::size_t>& per_impostor) {
  LabeledSet s;
  s.features.values = Matrix(0, 1);
  auto add = [&](int user, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      s.features.values.append_row(std::vector<double>{static_cast<double>(s.labels.size())});
      s.features.meta.push_back(RowMeta{user, 1, i, 0});
      s.labels.push_back(user == 1 ? 1 : 0);
    }
  };
  add(1, genuine);
  for (std::size_t k = 0; k < per_impostor.size(); ++k) add(static_cast<int>(k) + 2, per_impostor[k]);
  return s;
}

std::size_t count_label(const LabeledSet& s, int label) {
  return static_cast<std::size_t>(std::count(s.labels.begin(), s.labels.end(), label));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_CASE("split plan validation") {
  CHECK_NOTHROW(SplitPlan{}.validate());
  CHECK(kind_of([] { SplitPlan{{1, 2, 3}, {3, 4}, {5}}.validate(); }) == ErrorKind::kInvalidConfig);
  CHECK(kind_of([] { SplitPlan{{1}, {}, {5}}.validate(); }) == ErrorKind::kInvalidConfig);
  CHECK(kind_of([] { SplitPlan{{1, 1}, {2}, {3}}.validate(); }) == ErrorKind::kInvalidConfig);
}

TEST_CASE("sessions route rows to exactly one split, order preserved") {
  const FeatureMatrix fm = blob_features(3, 9, 7, 4, 4, 1.0, 1);
  const DataSplits s = split_sessions(fm, SplitPlan{});
  CHECK(s.train.rows() + s.validation.rows() + s.test.rows() == fm.rows());
  CHECK(s.train.rows() == 3 * 5 * 7);
  CHECK(s.validation.rows() == 3 * 2 * 7);
  for (const auto& m : s.test.meta) CHECK((m.session_id == 8 || m.session_id == 9));
  // within-split order follows the source rows
  std::size_t src = 0;
  for (std::size_t i = 0; i < s.validation.rows(); ++i) {
    while (!(fm.meta[src] == s.validation.meta[i])) ++src;
    CHECK(fm.values.row(src)[0] == s.validation.values.row(i)[0]);
  }
  CHECK(kind_of([&] { split_sessions(fm, SplitPlan{{1, 2}, {3}, {10}}); }) == ErrorKind::kUnknownSession);
  CHECK(partition_rows(fm, SplitPlan{{1, 2}, {3}, {10}}).test.rows() == 0);
}

TEST_CASE("random plans partition the covered rows (property)") {
  Rng rng(5);
  const FeatureMatrix fm = blob_features(2, 12, 3, 2, 2, 1.0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> sessions(12);
    for (int i = 0; i < 12; ++i) sessions[i] = i + 1;
    rng.shuffle(sessions);
    const std::size_t a = 1 + rng.below(9);
    const std::size_t b = a + 1 + rng.below(10 - a);
    const std::size_t c = b + 1 + rng.below(12 - b);
    SplitPlan plan{{sessions.begin(), sessions.begin() + a},
                   {sessions.begin() + a, sessions.begin() + b},
                   {sessions.begin() + b, sessions.begin() + c}};
    const DataSplits s = split_sessions(fm, plan);
    CHECK(s.train.rows() + s.validation.rows() + s.test.rows() == c * 2 * 3);
    std::set<std::tuple<int, int, std::size_t>> seen;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
      for (const auto& m : part->meta) CHECK(seen.insert({m.user_id, m.session_id, m.window_index}).second);
    }
  }
}

TEST_CASE("one-vs-rest labels") {
  const FeatureMatrix fm = blob_features(4, 9, 5, 3, 3, 1.0, 3);
  const AuthTask t = make_auth_task(split_sessions(fm, SplitPlan{}), 2);
  CHECK(t.impostors == std::vector<int>{1, 3, 4});
  for (const auto* set : {&t.train, &t.validation, &t.test}) {
    REQUIRE(set->labels.size() == set->features.rows());
    for (std::size_t i = 0; i < set->labels.size(); ++i) {
      CHECK(set->labels[i] == (set->features.meta[i].user_id == 2 ? 1 : 0));
    }
  }
}

TEST_CASE("impostor downsampling examples") {
  BalanceReport r;
  const LabeledSet big = labeled(1000, std::vector<std::size_t>(11, 5000));
  const LabeledSet b = balance_set(big, 1, 9, &r);
  CHECK(r.per_impostor_quota == 90);
  CHECK(r.impostor_rows == 990);
  CHECK(count_label(b, 1) == 1000);
  CHECK(count_label(b, 0) == 990);
  std::map<int, int> per;
  for (const auto& m : b.features.meta) ++per[m.user_id];
  for (int u = 2; u <= 12; ++u) CHECK(per[u] == 90);

  const LabeledSet exact = balance_set(labeled(990, std::vector<std::size_t>(11, 5000)), 1, 9, &r);
  CHECK(count_label(exact, 0) == 990);
  CHECK(count_label(exact, 1) == 990);

  // same seed, same rows; different seed, different rows
  CHECK(balance_set(big, 1, 9).features.meta == b.features.meta);
  CHECK_FALSE(balance_set(big, 1, 10).features.meta == b.features.meta);

  // an impostor short of the quota is kept whole and reported
  const LabeledSet shorty = balance_set(labeled(100, {500, 500, 10}), 1, 1, &r);
  CHECK(r.per_impostor_quota == 33);
  CHECK(r.short_impostors == std::vector<int>{4});
  CHECK(count_label(shorty, 0) == 76);

  CHECK(kind_of([] { balance_set(labeled(3, {10, 10, 10, 10}), 1, 1); }) == ErrorKind::kDegenerate);
}

TEST_CASE("balance bound and row order (property)") {
  Rng rng(44);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng.below(12);
    const std::size_t g = m + rng.below(400);
    std::vector<std::size_t> per(m);
    for (auto& p : per) p = g / m + rng.below(300);
    BalanceReport r;
    const LabeledSet b = balance_set(labeled(g, per), 1, rng.next_u64(), &r);
    const std::size_t imp = count_label(b, 0);
    CHECK(imp == m * (g / m));
    CHECK(g - imp < m);
    CHECK(r.short_impostors.empty());
    // kept rows stay in source order and are distinct
    for (std::size_t i = 1; i < b.labels.size(); ++i) {
      CHECK(b.features.values.row(i - 1)[0] < b.features.values.row(i)[0]);
    }
  }
}

TEST_CASE("balance_downsample leaves validation and test untouched") {
  const FeatureMatrix fm = blob_features(4, 9, 10, 3, 3, 1.0, 7);
  const AuthTask t = make_auth_task(split_sessions(fm, SplitPlan{}), 1);
  const AuthTask b = balance_downsample(t, 3);
  CHECK(b.validation.features.meta == t.validation.features.meta);
  CHECK(b.test.features.meta == t.test.features.meta);
  CHECK(count_label(b.train, 1) == 50);
  CHECK(count_label(b.train, 0) == 48);
}

TEST_CASE("metrics examples") {
  const Metrics m = metrics(ConfusionMatrix{40, 10, 20, 30});
  CHECK(m.accuracy == doctest::Approx(0.70));
  CHECK(m.precision == doctest::Approx(0.80));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(0.7272727272727273));
  const Metrics perfect = metrics(ConfusionMatrix{5, 0, 0, 7});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);
  const Metrics none = metrics(ConfusionMatrix{0, 4, 3, 2});
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  const Metrics negatives = metrics(ConfusionMatrix{0, 0, 0, 9});
  CHECK(negatives.accuracy == 1.0);
  CHECK(negatives.recall == 0.0);
}

TEST_CASE("confusion counts (property)") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(100);
    std::vector<int> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.below(2));
      t[i] = static_cast<int>(rng.below(2));
    }
    const ConfusionMatrix cm = confusion(p, t);
    CHECK(cm.total() == n);
    CHECK(cm.tp + cm.fn == static_cast<std::size_t>(std::count(t.begin(), t.end(), 1)));
    CHECK(cm.tp + cm.fp == static_cast<std::size_t>(std::count(p.begin(), p.end(), 1)));
    const Metrics m = metrics(cm);
    if (m.precision + m.recall > 0) {
      CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
    }
  }
  CHECK_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), Error);
}

TEST_CASE("authentication on separable users") {
  const FeatureMatrix fm = blob_features(4, 9, 24, 12, 6, 3.0, 11);
  const AuthConfig cfg = quick_auth_config(5);
  const AuthOutcome out = run_authentication(fm, SplitPlan{}, cfg);
  CHECK(out.failures.empty());
  REQUIRE(out.fits.size() == 4);
  for (const UserFit& fit : out.fits) {
    for (const FamilyFit& ff : fit.families) CHECK(dual_violation(ff.grid.model).empty());
  }
  for (ClassifierFamily f : cfg.classifiers) {
    const auto& rows = out.results.at(f);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].user_id == static_cast<int>(i) + 1);
      CHECK(rows[i].test_confusion.total() == rows[i].test_rows);
      CHECK(rows[i].test_accuracy > 0.9);
      CHECK(rows[i].selected_features >= 1);
      // balanced evaluation: genuine and impostor test rows within the impostor count
      const auto& cm = rows[i].test_confusion;
      const std::size_t genuine = cm.tp + cm.fn;
      const std::size_t impostor = cm.fp + cm.tn;
      CHECK(genuine - impostor < 3);
    }
  }
}

TEST_CASE("authentication is independent of the worker count") {
  const FeatureMatrix fm = blob_features(5, 9, 12, 8, 4, 1.0, 12);
  AuthConfig cfg = quick_auth_config(7);
  cfg.workers = 1;
  const AuthOutcome a = run_authentication(fm, SplitPlan{}, cfg);
  cfg.workers = 3;
  const AuthOutcome b = run_authentication(fm, SplitPlan{}, cfg);
  REQUIRE(a.fits.size() == b.fits.size());
  for (std::size_t i = 0; i < a.fits.size(); ++i) CHECK(fit_difference(a.fits[i], b.fits[i]).empty());
  for (ClassifierFamily f : cfg.classifiers) {
    for (std::size_t i = 0; i < a.results.at(f).size(); ++i) {
      CHECK(a.results.at(f)[i].test_confusion == b.results.at(f)[i].test_confusion);
    }
  }
}

TEST_CASE("test rows never reach train-fitted parameters") {
  const FeatureMatrix fm = blob_features(4, 9, 15, 8, 4, 1.0, 13);
  const AuthConfig cfg = quick_auth_config(9);
  const AuthOutcome ref = run_authentication(fm, SplitPlan{}, cfg);

  // overwrite every test value with unrelated noise: fits must not move
  FeatureMatrix noisy = fm;
  Rng rng(99);
  for (std::size_t i = 0; i < noisy.rows(); ++i) {
    if (noisy.meta[i].session_id < 8) continue;
    for (std::size_t j = 0; j < noisy.cols(); ++j) noisy.values(i, j) = rng.normal() * 100.0;
  }
  const AuthOutcome moved = run_authentication(noisy, SplitPlan{}, cfg);
  REQUIRE(moved.fits.size() == ref.fits.size());
  for (std::size_t i = 0; i < ref.fits.size(); ++i) CHECK(fit_difference(ref.fits[i], moved.fits[i]).empty());

  // refit by hand with the test split deleted
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    if (fm.meta[i].session_id < 8) keep.push_back(i);
  }
  const DataSplits no_test = partition_rows(fm.select_rows(keep), SplitPlan{});
  REQUIRE(no_test.test.rows() == 0);
  for (const UserFit& r : ref.fits) {
    const UserSeeds seeds = user_seeds(cfg.seed, r.user_id);
    const AuthTask task = make_auth_task(no_test, r.user_id);
    const LabeledSet train = balance_set(task.train, r.user_id, seeds.train_balance);
    const LabeledSet val = balance_set(task.validation, r.user_id, seeds.eval_balance_val);
    CHECK(fit_difference(r, fit_user(r.user_id, train, val, cfg)).empty());
  }
}

TEST_CASE("per-user failures abort or are recorded") {
  FeatureMatrix fm = blob_features(4, 9, 10, 6, 3, 1.0, 14);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    if (!(fm.meta[i].user_id == 3 && fm.meta[i].session_id >= 8)) keep.push_back(i);
  }
  fm = fm.select_rows(keep);
  AuthConfig cfg = quick_auth_config(1);
  try {
    run_authentication(fm, SplitPlan{}, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("user 3: ", 0) == 0);
  }
  cfg.keep_going = true;
  const AuthOutcome out = run_authentication(fm, SplitPlan{}, cfg);
  REQUIRE(out.failures.size() == 1);
  CHECK(out.failures[0].user_id == 3);
  CHECK(out.fits.size() == 3);
  CHECK(out.results.at(ClassifierFamily::kRbfSvm).size() == 3);

  const FeatureMatrix one = blob_features(1, 9, 10, 3, 3, 1.0, 1);
  CHECK(kind_of([&] { run_authentication(one, SplitPlan{}, cfg); }) == ErrorKind::kSingleClass);
}

TEST_CASE("label permutation keeps values and the id multiset") {
  const FeatureMatrix fm = blob_features(4, 3, 20, 2, 2, 1.0, 15);
  const FeatureMatrix p = permute_user_labels(fm, 3);
  CHECK(p.values.data() == fm.values.data());
  std::multiset<int> a, b;
  std::size_t moved = 0;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    a.insert(fm.meta[i].user_id);
    b.insert(p.meta[i].user_id);
    CHECK(p.meta[i].session_id == fm.meta[i].session_id);
    moved += p.meta[i].user_id != fm.meta[i].user_id;
  }
  CHECK(a == b);
  CHECK(moved > fm.rows() / 2);
  CHECK(permute_user_labels(fm, 3).meta == p.meta);
}

TEST_CASE("pilot on perfectly separable users gives a diagonal confusion matrix") {
  const FeatureMatrix fm = blob_features(5, 2, 30, 6, 6, 40.0, 16);
  for (PilotClassifier c : {PilotClassifier::kLda, PilotClassifier::kSvm}) {
    PilotConfig cfg;
    cfg.svm_C = 1.0;
    const PilotReport r = run_pilot(fm, c, cfg);
    CHECK(r.classes == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(r.train_rows == 5 * 48);
    CHECK(r.test_rows == 5 * 12);
    CHECK(r.accuracy == 1.0);
    for (std::size_t t = 0; t < 5; ++t) {
      for (std::size_t p = 0; p < 5; ++p) CHECK(r.confusion[t][p] == (t == p ? 12u : 0u));
    }
    if (c == PilotClassifier::kLda) CHECK(r.projection_dims == 4);
  }
  PilotConfig bad;
  bad.train_fraction = 1.0;
  CHECK(kind_of([&] { run_pilot(fm, PilotClassifier::kLda, bad); }) == ErrorKind::kInvalidConfig);
}

TEST_CASE("chronological pilot trains on the earliest windows") {
  // session 2 swaps the user centres around, so a model trained on session 1
  // alone misclassifies every session-2 row
  const FeatureMatrix base = blob_features(3, 1, 50, 6, 6, 40.0, 17);
  FeatureMatrix fm = base;
  for (std::size_t i = 0; i < base.rows(); ++i) {
    RowMeta m = base.meta[i];
    m.session_id = 2;
    const std::size_t donor = (i + 50) % base.rows();  // next user's row
    fm.values.append_row(base.values.row(donor));
    fm.meta.push_back(m);
  }
  PilotConfig chrono;
  chrono.train_fraction = 0.5;
  const PilotReport c = run_pilot(fm, PilotClassifier::kLda, chrono);
  CHECK(c.accuracy == 0.0);
  PilotConfig shuffled = chrono;
  shuffled.chronological = false;
  CHECK(run_pilot(fm, PilotClassifier::kLda, shuffled).accuracy > 0.0);
}
