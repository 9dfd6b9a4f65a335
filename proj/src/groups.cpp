namespace hsw { int stub_groups = 0; }
