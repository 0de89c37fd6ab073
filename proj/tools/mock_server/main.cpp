// Serves canned completions over the OpenAI wire format, for offline runs.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "textcoder/commands.hpp"
#include "textcoder/mock_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"OpenAI-compatible mock completions server"};
  std::string fixtures;
  std::string host = "127.0.0.1";
  int port = 8089;
  std::string prefix = "/v1";
  app.add_option("fixtures", fixtures, "Fixtures JSON")->required();
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  app.add_option("--prefix", prefix, "Path prefix")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  return textcoder::cli::guarded(
      [&] {
        textcoder::MockLlmServer server(textcoder::MockFixtures::load(fixtures), prefix);
        std::cerr << "serving on http://" << host << ":" << port << prefix << '\n';
        server.listen(host, port);
        return 0;
      },
      std::cerr);
}
