#pragma once

#include <vector>

#include "zsp/domain.hpp"

namespace zsp {

DomainPtr make_calendar_domain();
DomainPtr make_container_domain();
DomainPtr make_file_domain();
DomainPtr make_lighting_domain();
DomainPtr make_list_domain();
DomainPtr make_messenger_domain();
DomainPtr make_workforce_domain();

/// Calendar, Container, File, Lighting, List, Messenger, Workforce.
std::vector<DomainPtr> builtin_domains();
DomainRegistry builtin_registry();

}  // namespace zsp
