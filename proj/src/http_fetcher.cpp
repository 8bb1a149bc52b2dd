#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <netdb.h>

#include "scout/snapshot.hpp"

namespace scout {

namespace {

bool resolves(const std::string& host) {
  if (is_ipv4_literal(host)) return true;
  addrinfo hints{};
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = getaddrinfo(host.c_str(), nullptr, &hints, &res);
  if (res) freeaddrinfo(res);
  return rc == 0;
}

TransportStatus classify(httplib::Error err) {
  switch (err) {
    case httplib::Error::ConnectionTimeout: return TransportStatus::timeout;
    case httplib::Error::Read: return TransportStatus::timeout;
    case httplib::Error::Connection:
    case httplib::Error::BindIPAddress:
    case httplib::Error::ProxyConnection: return TransportStatus::connect_failure;
    case httplib::Error::SSLConnection:
    case httplib::Error::SSLLoadingCerts:
    case httplib::Error::SSLServerVerification: return TransportStatus::tls_failure;
    case httplib::Error::ExceedRedirectCount: return TransportStatus::too_many_redirects;
    default: return TransportStatus::other_failure;
  }
}

}  // namespace

HttpResponse HttpFetcher::get(const Url& url, const FetchLimits& limits) {
  HttpResponse out;
  if (!resolves(url.host)) {
    out.transport = TransportStatus::dns_failure;
    return out;
  }
  httplib::Client client(url.origin());
  const auto secs = static_cast<time_t>(limits.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  client.set_follow_location(false);
  client.enable_server_certificate_verification(verify_tls_);
  client.set_default_headers({{"User-Agent", "scout/1.0"}});

  const auto res = client.Get(
      url.path,
      [&](const httplib::Response& r) {
        out.status = r.status;
        out.location = r.get_header_value("Location");
        return true;
      },
      [&](const char* data, std::size_t len) {
        const std::size_t room = limits.max_bytes - out.body.size();
        if (len > room) {
          out.body.append(data, room);
          out.truncated = true;
          return false;
        }
        out.body.append(data, len);
        return true;
      });
  if (!res) {
    if (res.error() == httplib::Error::Canceled && out.truncated) return out;
    out.transport = classify(res.error());
    out.body.clear();
    return out;
  }
  out.status = res->status;
  return out;
}

}  // namespace scout
