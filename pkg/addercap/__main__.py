from addercap.cli import main

raise SystemExit(main())
