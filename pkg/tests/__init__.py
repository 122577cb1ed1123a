# Tests for false-theta
