#include "geosamp/learner.hpp"

namespace geosamp {

Evaluation evaluate_sample_detailed(const Dataset& ds, const SampleState& state, std::uint64_t seed) {
  const auto train = state.labeled_points();
  RidgeCvOptions opts;
  opts.seed = seed;
  if (train.size() < static_cast<std::size_t>(opts.folds))
    throw DataError("sample has " + std::to_string(train.size()) + " labeled points, fewer than " +
                    std::to_string(opts.folds) + " folds");
  const auto test = ds.test_points();
  Evaluation ev;
  ev.model = ridge_fit_cv(ds.design_matrix(train), ds.label_vector(train), opts);
  ev.r2 = r2_score(ds.label_vector(test), predict(ev.model, ds.design_matrix(test)));
  ev.train_rows = train.size();
  ev.test_rows = test.size();
  return ev;
}

GroupModel feature_groups(const Dataset& ds, int groups, std::uint64_t seed) {
  std::vector<std::size_t> all(ds.points().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto km = kmeans_groups(ds.design_matrix(all), groups, seed);
  return GroupModel(std::move(km.assignment), groups, GroupKind::feature_kmeans);
}

GroupModel auxiliary_groups(const Dataset& ds, const Eigen::MatrixXd& aux, int groups, std::uint64_t seed) {
  if (static_cast<std::size_t>(aux.rows()) != ds.points().size())
    throw DataError("auxiliary table has " + std::to_string(aux.rows()) + " rows for " +
                    std::to_string(ds.points().size()) + " points");
  auto km = kmeans_groups(aux, groups, seed);
  return GroupModel(std::move(km.assignment), groups, GroupKind::auxiliary_kmeans);
}

double evaluate_sample(const Dataset& ds, const SampleState& state, std::uint64_t seed) {
  return evaluate_sample_detailed(ds, state, seed).r2;
}

}  // namespace geosamp
