#pragma once

#include <memory>
#include <string>

#include "tgr/corpus.hpp"
#include "tgr/oracle.hpp"

namespace httplib {
class Server;
}

namespace tgr {

/// Serves the remote wire protocol over a corpus, answering every role from
/// the simulator oracles. Bundled for golden tests and offline runs.
class StubService {
 public:
  StubService(Corpus corpus, OracleOptions oracle_options = {});
  ~StubService();

  void attach(httplib::Server& server);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// In-process stub server on a background thread (tests, tools).
class StubServer {
 public:
  StubServer(Corpus corpus, OracleOptions oracle_options = {},
             const std::string& host = "127.0.0.1");
  ~StubServer();

  int port() const { return port_; }
  std::string endpoint() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace tgr
