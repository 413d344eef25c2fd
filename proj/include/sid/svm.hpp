#ifndef SID_SVM_HPP
#define SID_SVM_HPP

#include <vector>

#include "sid/matrix.hpp"

namespace sid::svm {

// Per-dimension zero-mean unit-variance transform fitted on training data;
// stored inside the model so prediction sees the same space.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;

  static Standardizer fit(const Matrix& X);
  static Standardizer identity(std::size_t dim);
  std::vector<double> apply(const double* x, std::size_t n) const;
};

struct SvmTrainOptions {
  double tol = 1e-3;       // KKT violation tolerance
  int max_passes = 10000;  // hard cap on optimization sweeps
  bool standardize = true;
};

// Soft-margin linear SVM trained by sequential pairwise optimization of the
// dual: 0 <= alpha_i <= C and sum alpha_i y_i = 0 hold throughout;
// w = sum alpha_i y_i x_i at convergence.
struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  double C = 1.0;
  std::vector<double> alpha;     // one per training point
  std::vector<int> support;      // indices with alpha > 1e-9
  Standardizer standardizer;

  double decision(const double* x, std::size_t n) const;
  double decision(const std::vector<double>& x) const;
  int predict(const std::vector<double>& x) const;  // sign, +1 on ties

  // 0.5 |w|^2 + C sum max(0, 1 - y f(x)) over the (standardized) training
  // set used to fit the model.
  double primal_objective(const Matrix& X, const std::vector<int>& y) const;
};

SvmModel train_binary(const Matrix& X, const std::vector<int>& y, double C,
                      const SvmTrainOptions& options = {});

struct OvrClassifier {
  std::vector<int> labels;       // ascending
  std::vector<SvmModel> models;  // one per label

  std::vector<double> decision_values(const std::vector<double>& x) const;
  // argmax over decision values; exact ties go to the lowest class index
  int predict(const std::vector<double>& x) const;
};

OvrClassifier train_ovr(const Matrix& X, const std::vector<int>& labels,
                        double C, const SvmTrainOptions& options = {});

}  // namespace sid::svm

#endif  // SID_SVM_HPP
