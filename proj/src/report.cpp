namespace hsw { int stub_report = 0; }
