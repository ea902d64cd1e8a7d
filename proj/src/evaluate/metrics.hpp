#pragma once

#include <cstddef>
#include <vector>

#include "core/matrix.hpp"

namespace rankkit {

// Average precision of a ranked list: items are ordered by score descending
// (ties broken by ascending index, so results are reproducible), and AP is
// the mean over relevant items of precision at their ranks. Throws when no
// item is relevant.
double average_precision(const double* scores, const unsigned char* relevant,
                         std::size_t n);
double average_precision(const std::vector<double>& scores,
                         const std::vector<unsigned char>& relevant);

// AP of every class column; class k's relevance is (label == k). Throws,
// naming the class, if some class in [0, cols) has no positive sample.
std::vector<double> per_class_average_precision(const Matrix& scores,
                                                const Labels& y);

// Unweighted mean of per-class AP.
double mean_average_precision(const Matrix& scores, const Labels& y);

} // namespace rankkit
