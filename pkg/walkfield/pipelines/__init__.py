# -*- coding: utf-8 -*-
"""One module per group of CLI verbs; each verb is run_<name>(config, out) -> CommandResult."""
