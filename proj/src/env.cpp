#include "arenakit/env.hpp"

#include <algorithm>
#include <limits>

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

std::string render_tab_header(const std::vector<TabSummary>& tabs) {
  std::string out;
  for (const auto& tab : tabs) {
    if (!out.empty()) out.push_back('\n');
    out += "Tab " + std::to_string(tab.index) + (tab.focused ? " (current)" : "") + ": " +
           tab.title;
  }
  return out;
}

Env::Env(EnvConfig config) : config_(std::move(config)) {}

void Env::require_session() const {
  if (!session_) throw SessionClosed("the environment has not been reset");
}

BackendSession& Env::session() {
  require_session();
  return *session_;
}

const BackendSession& Env::session() const {
  require_session();
  return *session_;
}

const Observation& Env::observation() const {
  require_session();
  return observation_;
}

const AxTree& Env::tree() const {
  require_session();
  return *tree_;
}

Observation Env::reset(const TaskInstance& task) {
  if (session_ && !session_->closed()) session_->close();
  session_.reset();
  session_ = open_session(config_.backend, task.sites, task.start_url);
  trace_ = Trace{};
  trace_.initial_state = session_->state_serialization();
  terminated_ = false;
  offset_ = 0;
  page_key_.clear();
  observe(std::nullopt);
  trace_.final_url = observation_.url;
  return observation_;
}

void Env::observe(std::optional<std::string> error) {
  PageView page = session_->current_page();
  std::vector<TabView> tabs = session_->tabs();
  std::size_t focused = session_->focused_tab();

  std::string key = std::to_string(focused) + "\n" + page.url;
  if (key != page_key_) {
    offset_ = 0;
    page_key_ = std::move(key);
  }

  auto snapshot = std::make_shared<DomSnapshot>(parse_html(page.html, page.url));
  snapshot->title = page.title;
  snapshot->focused = page.focused;
  tree_.emplace(derive_axtree(snapshot, Viewport{offset_, config_.max_obs_nodes}));
  offset_ = tree_->window().offset;

  Observation obs;
  obs.url = page.url;
  for (std::size_t i = 0; i < tabs.size(); ++i) {
    obs.tabs.push_back({i, i == focused ? page.title : tabs[i].title, i == focused});
  }
  obs.content = render_tab_header(obs.tabs) + "\n\n" + render_axtree(*tree_);
  obs.text = obs.content + "\nURL: " + obs.url;
  obs.error = std::move(error);
  observation_ = std::move(obs);
}

StepResult Env::finish_step(TraceStep step, bool stop) {
  observe(step.error);
  step.url_after = observation_.url;
  step.state_after = session_->state_serialization();
  if (stop && !step.error) {
    terminated_ = true;
    trace_.stop_answer = step.parsed->text.value_or("");
  }
  trace_.steps.push_back(std::move(step));
  trace_.final_url = observation_.url;
  StepResult result{observation_, terminated_, std::nullopt};
  if (terminated_) result.stop_answer = trace_.stop_answer;
  return result;
}

StepResult Env::step(const Action& action, std::optional<std::string> raw) {
  require_session();
  TraceStep record;
  record.observation = observation_;
  record.raw_action = raw ? std::move(*raw) : serialize(action);
  record.parsed = action;

  if (terminated_) {
    record.error = "the episode has already ended";
    return finish_step(std::move(record), false);
  }
  if (!is_well_formed(action)) {
    record.error = "malformed action '" + serialize(action) + "'";
    return finish_step(std::move(record), false);
  }
  if (action.kind == ActionKind::kGoto && !text::starts_with_icase(*action.text, "http://") &&
      !text::starts_with_icase(*action.text, "https://")) {
    record.error = "goto needs an absolute http(s) URL, got '" + *action.text + "'";
    return finish_step(std::move(record), false);
  }

  try {
    switch (action.kind) {
      case ActionKind::kStop:
        break;
      case ActionKind::kScroll: {
        if (!config_.max_obs_nodes) break;
        std::size_t window = std::max<std::size_t>(*config_.max_obs_nodes, 1);
        std::size_t total = tree_->nodes().size();
        if (action.direction == ScrollDirection::kDown) {
          if (offset_ + window < total) offset_ += window;
        } else {
          offset_ = offset_ >= window ? offset_ - window : 0;
        }
        session_->perform(action, std::nullopt);
        break;
      }
      case ActionKind::kClick:
      case ActionKind::kHover:
      case ActionKind::kType: {
        std::optional<NodePath> target;
        if (action.element->is_id()) {
          auto id = action.element->id();
          if (id < 1 || id > std::numeric_limits<int>::max()) {
            throw UnknownElement("Unknown element id " + std::to_string(id));
          }
          target = resolve_element(*tree_, static_cast<int>(id)).dom_path;
        }
        session_->perform(action, target);
        break;
      }
      default:
        session_->perform(action, std::nullopt);
        break;
    }
  } catch (const Error& e) {
    record.error = e.what();
  }
  return finish_step(std::move(record), action.kind == ActionKind::kStop);
}

StepResult Env::step_invalid(std::string raw, std::string error) {
  require_session();
  TraceStep record;
  record.observation = observation_;
  record.raw_action = std::move(raw);
  record.error = std::move(error);
  return finish_step(std::move(record), false);
}

}  // namespace arenakit
