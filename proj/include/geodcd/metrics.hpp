#pragma once

// Partition scoring: AMI, element-centric similarity, modularity, plus label
// alignment and trace summaries.

#include <string>
#include <vector>

#include "geodcd/graph.hpp"

namespace geodcd {

// Adjusted mutual information, permutation-model expected MI, max normalization.
// Positions where either labeling is -1 are skipped.
double ami(const std::vector<int>& a, const std::vector<int>& b);

// Element-centric similarity with restart alpha. Hard partitions use the
// cluster-size fast path; soft or overlapping ones go through the affinity
// matrix. Membership matrices are d x k, nonnegative.
double ecs(const std::vector<int>& a, const std::vector<int>& b, double alpha = 0.9);
double ecs(const Mat& membership_a, const Mat& membership_b, double alpha = 0.9);

// Newman-Girvan modularity on the symmetrized |A| (all views summed).
double modularity(const GraphSnapshot& g, const std::vector<int>& labels);
double modularity(const Mat& a, const std::vector<int>& labels);

// Relabels curr by maximum-overlap matching against prev. Unmatched curr
// communities get fresh ids above every id used in prev.
std::vector<int> align_labels(const std::vector<int>& prev, const std::vector<int>& curr);

// Hungarian assignment on a square cost matrix (minimization); returns the
// column for each row.
std::vector<int> hungarian(const Mat& cost);

struct Summary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

// Linear-interpolation quantile on a copy.
double quantile(std::vector<double> v, double q);
Summary summarize(const std::vector<double>& v);

// Score one step of a partition sequence against truth with "ami" or "ecs".
// Soft predictions against hard truth are thresholded at p_thresh for ecs and
// argmaxed for ami.
double score_step(const Partition& truth, const Partition& pred, const std::string& metric, double p_thresh = 0.2);

}  // namespace geodcd
