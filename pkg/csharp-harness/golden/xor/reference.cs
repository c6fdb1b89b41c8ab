public static class xOrUtil
{
    public static bool xOr(int[] v)
    {
        bool r = false;
        foreach (int e in v)
        {
            r = r || e == 1;
            if (r) break;
        }
        return r;
    }
}
