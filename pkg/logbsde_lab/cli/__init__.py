# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .main import build_argument_parser, config_for_command, main

_all_ = ["build_argument_parser", "config_for_command", "main"]
