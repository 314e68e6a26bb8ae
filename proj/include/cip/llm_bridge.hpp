#pragma once

#include "cip/llm/client.hpp"
#include "cip/llm/mock_server.hpp"
#include "cip/llm/oracles.hpp"
#include "cip/llm/prompts.hpp"
