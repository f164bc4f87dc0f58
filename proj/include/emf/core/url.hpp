// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace emf {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // path without trailing slash, may be empty
};

inline UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    UrlParts e;
    if (path_start == std::string::npos) {
        e.origin = url;
    } else {
        e.origin = url.substr(0, path_start);
        e.path = url.substr(path_start);
    }
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
}

}  // namespace emf
