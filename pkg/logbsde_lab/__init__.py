# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import os

# Numerical runs never report usage data.
os.environ.setdefault("HAYSTACK_TELEMETRY_ENABLED", "False")
