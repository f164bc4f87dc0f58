// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference for the quality scores, written from the metric
// definitions over the raw container view. Slow and direct on purpose.

#pragma once

#include <string>
#include <vector>

#include "emv_reader.hpp"

namespace emf::oracle {

struct RefConfig {
    int bins = 8;
    double k = 100.0;
    int clip_low = 0;
    int clip_high = 255;
    double presence = 0.5;
};

struct RefReport {
    double imaging = 0, background = 0, subject = 0, overall = 0, average = 0;
};

double ref_laplacian_variance(const std::vector<std::uint8_t>& frame, std::size_t w, std::size_t h);
double ref_imaging(const RawClip& c, const RefConfig& cfg = {});
double ref_background(const RawClip& c, const RefConfig& cfg = {});
double ref_subject(const RawClip& c, const std::vector<std::string>& subjects, const RefConfig& cfg = {});
double ref_overall(const RawClip& c, const std::vector<std::string>& subjects, const RefConfig& cfg = {});
RefReport ref_evaluate(const RawClip& c, const std::vector<std::string>& subjects, const RefConfig& cfg = {});

}  // namespace emf::oracle
