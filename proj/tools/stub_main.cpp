#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "tgr/corpus.hpp"
#include "tgr/stub_service.hpp"

namespace {
httplib::Server* g_server = nullptr;
void handle_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

// Serves the remote wire protocol from simulator oracles over a corpus.
int main(int argc, char** argv) {
  CLI::App app{"tgr-stub - oracle-backed stub server for the remote wire protocol"};
  std::string corpus_path;
  std::string host = "127.0.0.1";
  int port = 8089;
  int ambiguity = 0;
  app.add_option("--corpus", corpus_path, "corpus file to serve")->required();
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port (0 picks a free port)");
  app.add_option("--ambiguity", ambiguity, "describe_target ambiguity level");
  CLI11_PARSE(app, argc, argv);

  try {
    tgr::OracleOptions opts;
    opts.describe_ambiguity = ambiguity;
    tgr::StubService service(tgr::load_corpus(corpus_path), opts);
    httplib::Server server;
    service.attach(server);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    if (port == 0) {
      port = server.bind_to_any_port(host);
      std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
      server.listen_after_bind();
    } else {
      std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
      server.listen(host, port);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
