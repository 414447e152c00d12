#include "arenakit/backend.hpp"

#include "arenakit/errors.hpp"
#include "arenakit/simsite.hpp"
#include "arenakit/webdriver.hpp"

namespace arenakit {

std::unique_ptr<BackendSession> open_session(const BackendConfig& config,
                                             const std::vector<std::string>& sites,
                                             const std::string& start_url) {
  if (config.kind == BackendConfig::Kind::kWebdriver) {
    if (config.webdriver_url.empty()) throw ConfigError("webdriver backend needs an endpoint url");
    std::string homepage;
    if (config.sites && !sites.empty() && config.sites->contains(sites.front())) {
      homepage = config.sites->get(sites.front()).start_url;
    }
    return std::make_unique<WebDriverSession>(config.webdriver_url, start_url, homepage);
  }
  if (!config.sites) throw ConfigError("simsite backend needs a site catalog");
  if (sites.empty()) throw ConfigError("no site given for the session");
  std::vector<std::shared_ptr<const SimSiteDefinition>> defs;
  for (const auto& id : sites) defs.push_back(config.sites->share(id));
  return std::make_unique<SimSiteSession>(std::move(defs), start_url);
}

}  // namespace arenakit
