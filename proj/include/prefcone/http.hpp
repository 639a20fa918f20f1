#pragma once

// Binds a SessionService to an httplib server.

#include <httplib.h>

#include "prefcone/service.hpp"

namespace prefcone::service {

inline Request to_request(const httplib::Request& req) {
    Request out;
    out.method = req.method;
    out.path = req.path;
    for (const auto& [k, v] : req.params) out.query.emplace(k, v);
    if (req.has_header("If-Match")) out.if_match = req.get_header_value("If-Match");
    out.body = req.body;
    return out;
}

inline void bind(httplib::Server& server, SessionService& svc) {
    auto handler = [&svc](const httplib::Request& req, httplib::Response& res) {
        const auto out = svc.handle(to_request(req));
        res.status = out.status;
        for (const auto& [k, v] : out.headers)
            if (k != "Content-Type") res.set_header(k, v);
        res.set_content(out.body, "application/json");
    };
    server.Get(R"(/sessions.*)", handler);
    server.Post(R"(/sessions.*)", handler);
    server.Delete(R"(/sessions.*)", handler);
}

}  // namespace prefcone::service
