# Shared Fowler test builders live in tests._fowler_helpers.
