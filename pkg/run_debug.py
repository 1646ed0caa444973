#!/usr/bin/env python
"""Debug server with invariant checks switched on."""

from amparser import create_app

if __name__ == '__main__':
    create_app('development').run(debug=True)
