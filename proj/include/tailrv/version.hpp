#pragma once

#define TAILRV_VERSION "0.1.0"
